#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "halfmoll/kernels.hpp"

namespace halfmoll {

// Evaluable scalar u(x, t); spatial x has the ambient (or tangential) dimension.
using SpaceTimeFunction = std::function<double(std::span<const double>, double)>;

struct Axis {
  double lo = 0.0;
  double step = 1.0;
  std::size_t count = 1;

  double node(std::size_t i) const noexcept { return lo + static_cast<double>(i) * step; }
  double hi() const noexcept { return node(count - 1); }

  // Nodes lo, lo + step, ..., hi; (hi - lo) must be a multiple of step.
  static Axis spanning(double lo, double hi, double step);

  bool operator==(const Axis&) const = default;
};

// Time axis 0, dt, ..., T.
Axis time_axis(double horizon, double dt);

// Tensor grid on [-A, A]^{d-1} x [0, L] with uniform spacing h. The normal
// coordinate is the last axis. `box` builds a grid with arbitrary axis
// ranges (used for curved domains), still with a common spacing.
class StripGrid {
 public:
  StripGrid(int dimension, double half_width, double depth, double spacing);
  static StripGrid box(std::vector<Axis> axes);

  int dimension() const noexcept { return static_cast<int>(axes_.size()); }
  double spacing() const noexcept { return axes_.front().step; }
  const std::vector<Axis>& axes() const noexcept { return axes_; }
  const Axis& axis(std::size_t i) const { return axes_.at(i); }
  const Axis& normal_axis() const noexcept { return axes_.back(); }
  std::size_t node_count() const noexcept;
  bool is_half_space() const noexcept { return normal_axis().lo == 0.0; }

  bool operator==(const StripGrid&) const = default;

 private:
  explicit StripGrid(std::vector<Axis> axes);
  std::vector<Axis> axes_;
};

// The face x_d = 0 of a StripGrid, optionally with a time axis.
class BoundaryGrid {
 public:
  explicit BoundaryGrid(StripGrid parent, std::optional<Axis> time = std::nullopt);

  const StripGrid& parent() const noexcept { return parent_; }
  std::vector<Axis> tangential_axes() const;
  const std::optional<Axis>& time() const noexcept { return time_; }

 private:
  StripGrid parent_;
  std::optional<Axis> time_;
};

enum class Support { bulk, boundary };
enum class Region { full, boundary };

// Values on (time x space) nodes, time slowest, last spatial axis fastest.
// Boundary fields carry only the tangential axes.
class SampledField {
 public:
  SampledField(StripGrid grid, std::optional<Axis> time, std::vector<double> values);
  SampledField(const BoundaryGrid& grid, std::vector<double> values);

  static SampledField sample(const StripGrid& grid, std::optional<Axis> time, const SpaceTimeFunction& f);
  static SampledField sample(const BoundaryGrid& grid, const SpaceTimeFunction& f);

  Support support() const noexcept { return support_; }
  const StripGrid& grid() const noexcept { return grid_; }
  const std::optional<Axis>& time() const noexcept { return time_; }
  // Axes of the value array: time first if present, then spatial axes.
  const std::vector<Axis>& layout() const noexcept { return layout_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t spatial_dims() const noexcept { return layout_.size() - (time_ ? 1 : 0); }
  std::size_t spatial_count() const noexcept;
  std::size_t time_count() const noexcept { return time_ ? time_->count : 1; }

  std::size_t flat_index(std::span<const std::size_t> index) const;
  double at(std::span<const std::size_t> index) const { return values_[flat_index(index)]; }
  // Spatial coordinates of spatial node `s` (flat over spatial axes).
  std::vector<double> spatial_node(std::size_t s) const;

  // Multilinear interpolation in (t, x); exact at nodes and for multilinear data.
  double interpolate(std::span<const double> x, double t = 0.0) const;

  SampledField time_slice(std::size_t n) const;
  SampledField boundary_slice() const;
  SampledField map(const std::function<double(double)>& f) const;

 private:
  SampledField(Support support, StripGrid grid, std::optional<Axis> time, std::vector<Axis> spatial,
               std::vector<double> values);

  Support support_;
  StripGrid grid_;
  std::optional<Axis> time_;
  std::vector<Axis> layout_;
  std::vector<double> values_;
};

std::vector<double> trapezoid_weights(const Axis& axis);

// Composite trapezoid over every axis of the field (time included). For
// Region::boundary a bulk field is restricted to x_d = 0 first.
double integrate(const SampledField& f, Region region = Region::full);

// (integral |f|^p)^(1/p); p = infinity gives the max norm.
double lp_norm(const SampledField& f, double p, Region region = Region::full);

struct QuadratureOptions {
  int points_per_width = 64;
};

// Tailored convolution (f * rho_hat)(x): samples y_d in [x_d, x_d + eta] only.
double convolve_half_space(const SampledField& f, const HalfSpaceKernel& kernel, std::span<const double> x,
                           QuadratureOptions options = {});

// Standard symmetric product mollifier restricted to y_d >= 0 (no extension).
double convolve_standard(const SampledField& f, double eta, std::span<const double> x,
                         QuadratureOptions options = {});

// (g * rho_tilde)(x', t) for a boundary field with a time axis: symmetric in
// x', forward one-sided in time (s in [t, t + eta]).
double convolve_boundary_spacetime(const SampledField& g, double eta, std::span<const double> tangential,
                                   double t, QuadratureOptions options = {});

// Same operations for evaluable functions (no strip to overhang).
double convolve_half_space(const std::function<double(std::span<const double>)>& f, int dimension, double eta,
                           std::span<const double> x, QuadratureOptions options = {});
double convolve_boundary_spacetime(const SpaceTimeFunction& g, std::size_t tangential_dims, double eta,
                                   std::span<const double> tangential, double t, QuadratureOptions options = {});

}  // namespace halfmoll
