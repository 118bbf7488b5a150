#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace halfmoll {

// Where the kernel looks relative to the evaluation point, in terms of the
// offset o = y - x: symmetric o in [-eta, eta], forward o in [0, eta]
// (the one-sided normal and time factors), backward o in [-eta, 0] (the
// reflected kernel, i.e. the adjoint of forward).
enum class StencilRole { symmetric, forward, backward };

// Discrete 1-D kernel: sum_k weights[k] * f(x + (first + k) * step).
struct Stencil1D {
  int first = 0;
  double step = 1.0;
  std::vector<double> weights;

  int last() const noexcept { return first + static_cast<int>(weights.size()) - 1; }
  double offset(std::size_t k) const noexcept { return (first + static_cast<int>(k)) * step; }
};

// Trapezoid samples of the scaled kernel, rescaled to unit discrete mass.
Stencil1D value_stencil(StencilRole role, double eta, double step);

// Samples of d/dx of the value kernel, rescaled so that the discrete first
// moment sum_k w_k o_k equals 1 (linear functions differentiate exactly).
Stencil1D derivative_stencil(StencilRole role, double eta, double step);

// Kernel-aligned step giving `points_per_width` intervals across eta.
inline double aligned_step(double eta, int points_per_width) { return eta / points_per_width; }

// Tensor-product quadrature: sum over all stencil nodes of the weight product
// times f(center + offsets).
double tensor_quadrature(std::span<const Stencil1D* const> stencils, std::span<const double> center,
                         const std::function<double(std::span<const double>)>& f);

// Dense row-major array (last axis fastest).
struct DenseArray {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  DenseArray() = default;
  explicit DenseArray(std::vector<std::size_t> dims, double fill = 0.0);
  std::size_t size() const noexcept { return data.size(); }
  std::size_t stride(std::size_t axis) const noexcept;
};

// Linear interpolation along one axis by an integer factor: n -> (n-1)*factor+1 nodes.
DenseArray refine_axis(const DenseArray& in, std::size_t axis, std::size_t factor);

// Applies a stencil along one axis. Stencil offsets are in units of that axis'
// index; output node j reads input around index origin + j * stride.
DenseArray convolve_axis(const DenseArray& in, std::size_t axis, const Stencil1D& stencil,
                         std::size_t origin, std::size_t stride, std::size_t count);

}  // namespace halfmoll
