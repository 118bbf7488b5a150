#include "halfmoll/stencil.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "halfmoll/error.hpp"
#include "halfmoll/kernels.hpp"
#include "halfmoll/parallel.hpp"

namespace halfmoll {
namespace {

struct Range {
  int first;
  int last;
};

Range stencil_range(StencilRole role, double eta, double step) {
  require(step > 0.0, ErrorKind::invalid_parameter, "stencil step must be positive");
  // Tolerate eta/step landing a hair below an integer.
  const int n = static_cast<int>(std::floor(eta / step * (1.0 + 1e-12)));
  if (!(n >= 2)) fail(ErrorKind::under_resolved, "kernel of width " + std::to_string(eta) + " spans fewer than two steps of " + std::to_string(step));
  switch (role) {
    case StencilRole::symmetric: return {-n, n};
    case StencilRole::forward: return {0, n};
    case StencilRole::backward: return {-n, 0};
  }
  return {0, 0};
}

double role_kernel(StencilRole role, double o, double eta) {
  switch (role) {
    case StencilRole::symmetric: return eval_symmetric(o, eta);
    case StencilRole::forward: return eval_one_sided(o, eta);
    case StencilRole::backward: return eval_one_sided(-o, eta);
  }
  return 0.0;
}

// d/do of role_kernel.
double role_kernel_slope(StencilRole role, double o, double eta) {
  switch (role) {
    case StencilRole::symmetric: return symmetric_derivative(o, eta);
    case StencilRole::forward: return one_sided_derivative(o, eta);
    case StencilRole::backward: return -one_sided_derivative(-o, eta);
  }
  return 0.0;
}

}  // namespace

namespace {

// Backward stencils are built as exact mirrors of the forward ones so the
// pair stays adjoint to the last bit.
Stencil1D mirrored(Stencil1D s, double sign) {
  std::reverse(s.weights.begin(), s.weights.end());
  for (double& w : s.weights) w *= sign;
  s.first = -s.last();
  return s;
}

}  // namespace

Stencil1D value_stencil(StencilRole role, double eta, double step) {
  if (role == StencilRole::backward) return mirrored(value_stencil(StencilRole::forward, eta, step), 1.0);
  const Range r = stencil_range(role, eta, step);
  Stencil1D s{r.first, step, {}};
  s.weights.reserve(static_cast<std::size_t>(r.last - r.first + 1));
  for (int k = r.first; k <= r.last; ++k) s.weights.push_back(step * role_kernel(role, k * step, eta));
  const double mass = std::accumulate(s.weights.begin(), s.weights.end(), 0.0);
  require(mass > 0.0, ErrorKind::under_resolved, "kernel stencil has no mass");
  for (double& w : s.weights) w /= mass;
  return s;
}

Stencil1D derivative_stencil(StencilRole role, double eta, double step) {
  if (role == StencilRole::backward) return mirrored(derivative_stencil(StencilRole::forward, eta, step), -1.0);
  const Range r = stencil_range(role, eta, step);
  Stencil1D s{r.first, step, {}};
  s.weights.reserve(static_cast<std::size_t>(r.last - r.first + 1));
  // d/dx K(y - x) = -K'(o)
  for (int k = r.first; k <= r.last; ++k)
    s.weights.push_back(-step * role_kernel_slope(role, k * step, eta));
  double first_moment = 0.0;
  for (std::size_t k = 0; k < s.weights.size(); ++k) first_moment += s.weights[k] * s.offset(k);
  require(first_moment > 0.0, ErrorKind::under_resolved, "derivative stencil is degenerate");
  for (double& w : s.weights) w /= first_moment;
  return s;
}

double tensor_quadrature(std::span<const Stencil1D* const> stencils, std::span<const double> center,
                         const std::function<double(std::span<const double>)>& f) {
  const std::size_t dims = stencils.size();
  require(center.size() == dims, ErrorKind::dimension, "quadrature center has wrong dimension");
  std::vector<std::size_t> index(dims, 0);
  std::vector<double> point(center.begin(), center.end());
  for (std::size_t a = 0; a < dims; ++a) point[a] = center[a] + stencils[a]->offset(0);
  double total = 0.0;
  while (true) {
    double weight = 1.0;
    for (std::size_t a = 0; a < dims && weight != 0.0; ++a) weight *= stencils[a]->weights[index[a]];
    if (weight != 0.0) total += weight * f(point);
    std::size_t a = dims;
    while (a > 0) {
      --a;
      if (++index[a] < stencils[a]->weights.size()) {
        point[a] = center[a] + stencils[a]->offset(index[a]);
        break;
      }
      index[a] = 0;
      point[a] = center[a] + stencils[a]->offset(0);
      if (a == 0) return total;
    }
    if (dims == 0) return total;
  }
}

DenseArray::DenseArray(std::vector<std::size_t> dims, double fill) : shape(std::move(dims)) {
  const std::size_t n =
      std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  data.assign(n, fill);
}

std::size_t DenseArray::stride(std::size_t axis) const noexcept {
  std::size_t s = 1;
  for (std::size_t a = axis + 1; a < shape.size(); ++a) s *= shape[a];
  return s;
}

namespace {

// Splits an array into (outer, axis, inner) and visits every line along `axis`.
struct LineLayout {
  std::size_t outer;
  std::size_t length;
  std::size_t inner;
};

LineLayout layout_of(const DenseArray& a, std::size_t axis) {
  require(axis < a.shape.size(), ErrorKind::dimension, "axis out of range");
  std::size_t outer = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= a.shape[i];
  return {outer, a.shape[axis], a.stride(axis)};
}

}  // namespace

DenseArray refine_axis(const DenseArray& in, std::size_t axis, std::size_t factor) {
  if (factor == 1) return in;
  const LineLayout l = layout_of(in, axis);
  require(l.length >= 2, ErrorKind::dimension, "cannot refine an axis with a single node");
  std::vector<std::size_t> shape = in.shape;
  const std::size_t fine = (l.length - 1) * factor + 1;
  shape[axis] = fine;
  DenseArray out(shape);
  parallel_for(l.outer, [&](std::size_t o) {
    for (std::size_t i = 0; i < l.inner; ++i) {
      const double* src = in.data.data() + o * l.length * l.inner + i;
      double* dst = out.data.data() + o * fine * l.inner + i;
      for (std::size_t j = 0; j < fine; ++j) {
        const std::size_t base = j / factor;
        const std::size_t rem = j % factor;
        double v = src[base * l.inner];
        if (rem != 0) {
          const double theta = static_cast<double>(rem) / static_cast<double>(factor);
          v = (1.0 - theta) * v + theta * src[(base + 1) * l.inner];
        }
        dst[j * l.inner] = v;
      }
    }
  });
  return out;
}

DenseArray convolve_axis(const DenseArray& in, std::size_t axis, const Stencil1D& stencil,
                         std::size_t origin, std::size_t stride, std::size_t count) {
  const LineLayout l = layout_of(in, axis);
  const long lo = static_cast<long>(origin) + stencil.first;
  const long hi = static_cast<long>(origin + (count == 0 ? 0 : (count - 1) * stride)) + stencil.last();
  require(count > 0 && lo >= 0 && hi < static_cast<long>(l.length), ErrorKind::domain,
          "stencil reaches outside the sampled lattice");
  std::vector<std::size_t> shape = in.shape;
  shape[axis] = count;
  DenseArray out(shape);
  const std::size_t taps = stencil.weights.size();
  parallel_for(l.outer, [&](std::size_t o) {
    const double* src_base = in.data.data() + o * l.length * l.inner;
    double* dst_base = out.data.data() + o * count * l.inner;
    for (std::size_t j = 0; j < count; ++j) {
      const std::size_t start = static_cast<std::size_t>(static_cast<long>(origin + j * stride) + stencil.first);
      double* dst = dst_base + j * l.inner;
      for (std::size_t k = 0; k < taps; ++k) {
        const double w = stencil.weights[k];
        if (w == 0.0) continue;
        const double* src = src_base + (start + k) * l.inner;
        for (std::size_t i = 0; i < l.inner; ++i) dst[i] += w * src[i];
      }
    }
  });
  return out;
}

}  // namespace halfmoll
