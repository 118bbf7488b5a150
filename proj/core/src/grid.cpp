#include "halfmoll/grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <tuple>

#include "halfmoll/error.hpp"
#include "halfmoll/parallel.hpp"
#include "halfmoll/stencil.hpp"

namespace halfmoll {
namespace {

std::size_t steps_between(double lo, double hi, double step, const char* what) {
  require(step > 0.0 && std::isfinite(step), ErrorKind::invalid_parameter, "spacing must be positive");
  if (!(hi >= lo)) fail(ErrorKind::invalid_parameter, std::string(what) + " has hi < lo");
  const double ratio = (hi - lo) / step;
  const double rounded = std::round(ratio);
  if (!(std::abs(ratio - rounded) <= 1e-9 * std::max(1.0, ratio))) fail(ErrorKind::invalid_parameter, std::string(what) + " extent is not a multiple of the spacing");
  return static_cast<std::size_t>(rounded);
}

std::size_t product(const std::vector<Axis>& axes, std::size_t from = 0) {
  std::size_t n = 1;
  for (std::size_t i = from; i < axes.size(); ++i) n *= axes[i].count;
  return n;
}

// Locates c on an axis for linear interpolation: lower node and weight of the upper one.
std::pair<std::size_t, double> locate(const Axis& axis, double c) {
  if (axis.count == 1) {
    require(std::abs(c - axis.lo) <= 1e-9 * std::max(1.0, std::abs(axis.lo)), ErrorKind::domain,
            "coordinate off a degenerate axis");
    return {0, 0.0};
  }
  const double u = (c - axis.lo) / axis.step;
  const double top = static_cast<double>(axis.count - 1);
  if (!(u >= -1e-9 && u <= top + 1e-9)) fail(ErrorKind::domain, "interpolation point " + std::to_string(c) + " outside [" + std::to_string(axis.lo) + ", " + std::to_string(axis.hi()) + "]");
  const double clamped = std::clamp(u, 0.0, top);
  std::size_t i = static_cast<std::size_t>(std::floor(clamped));
  if (i >= axis.count - 1) i = axis.count - 2;
  return {i, clamped - static_cast<double>(i)};
}

void check_fits(const Axis& axis, double lo, double hi, ErrorKind kind, const char* what) {
  const double tol = 1e-9 * axis.step;
  if (!(lo >= axis.lo - tol && hi <= axis.hi() + tol)) fail(kind, std::string(what) + " [" + std::to_string(lo) + ", " + std::to_string(hi) + "] overhangs the grid extent [" + std::to_string(axis.lo) + ", " + std::to_string(axis.hi()) + "]");
}

}  // namespace

Axis Axis::spanning(double lo, double hi, double step) {
  return Axis{lo, step, steps_between(lo, hi, step, "axis") + 1};
}

Axis time_axis(double horizon, double dt) {
  require(horizon > 0.0, ErrorKind::invalid_parameter, "time horizon must be positive");
  return Axis::spanning(0.0, horizon, dt);
}

StripGrid::StripGrid(int dimension, double half_width, double depth, double spacing) {
  require(dimension >= 1, ErrorKind::invalid_parameter, "dimension must be at least 1");
  require(depth > 0.0, ErrorKind::invalid_parameter, "normal extent L must be positive");
  require(dimension == 1 || half_width > 0.0, ErrorKind::invalid_parameter,
          "tangential half-width A must be positive");
  for (int i = 0; i + 1 < dimension; ++i) axes_.push_back(Axis::spanning(-half_width, half_width, spacing));
  axes_.push_back(Axis::spanning(0.0, depth, spacing));
}

StripGrid::StripGrid(std::vector<Axis> axes) : axes_(std::move(axes)) {}

StripGrid StripGrid::box(std::vector<Axis> axes) {
  require(!axes.empty(), ErrorKind::invalid_parameter, "grid needs at least one axis");
  for (const Axis& a : axes) {
    require(a.count >= 2, ErrorKind::invalid_parameter, "grid axes need at least two nodes");
    require(std::abs(a.step - axes.front().step) <= 1e-14 * axes.front().step, ErrorKind::invalid_parameter,
            "grid spacing must be uniform across axes");
  }
  return StripGrid(std::move(axes));
}

std::size_t StripGrid::node_count() const noexcept { return product(axes_); }

BoundaryGrid::BoundaryGrid(StripGrid parent, std::optional<Axis> time)
    : parent_(std::move(parent)), time_(time) {}

std::vector<Axis> BoundaryGrid::tangential_axes() const {
  std::vector<Axis> axes = parent_.axes();
  axes.pop_back();
  return axes;
}

SampledField::SampledField(Support support, StripGrid grid, std::optional<Axis> time, std::vector<Axis> spatial,
                           std::vector<double> values)
    : support_(support), grid_(std::move(grid)), time_(time), values_(std::move(values)) {
  if (time_) layout_.push_back(*time_);
  layout_.insert(layout_.end(), spatial.begin(), spatial.end());
  if (!(values_.size() == product(layout_))) fail(ErrorKind::dimension, "value array has " + std::to_string(values_.size()) + " entries, grid has " + std::to_string(product(layout_)));
  for (double v : values_) require(std::isfinite(v), ErrorKind::invalid_parameter, "non-finite sample");
}

SampledField::SampledField(StripGrid grid, std::optional<Axis> time, std::vector<double> values)
    : SampledField(Support::bulk, grid, time, grid.axes(), std::move(values)) {}

SampledField::SampledField(const BoundaryGrid& grid, std::vector<double> values)
    : SampledField(Support::boundary, grid.parent(), grid.time(), grid.tangential_axes(), std::move(values)) {}

SampledField SampledField::sample(const StripGrid& grid, std::optional<Axis> time, const SpaceTimeFunction& f) {
  const std::size_t nt = time ? time->count : 1;
  const std::size_t ns = grid.node_count();
  std::vector<double> values(nt * ns);
  SampledField probe(grid, std::nullopt, std::vector<double>(ns, 0.0));
  parallel_for(nt * ns, [&](std::size_t i) {
    const double t = time ? time->node(i / ns) : 0.0;
    values[i] = f(probe.spatial_node(i % ns), t);
  });
  return SampledField(grid, time, std::move(values));
}

SampledField SampledField::sample(const BoundaryGrid& grid, const SpaceTimeFunction& f) {
  const auto& time = grid.time();
  std::vector<Axis> tangential = grid.tangential_axes();
  const std::size_t nt = time ? time->count : 1;
  const std::size_t ns = product(tangential);
  std::vector<double> values(nt * ns);
  SampledField probe(BoundaryGrid(grid.parent()), std::vector<double>(ns, 0.0));
  parallel_for(nt * ns, [&](std::size_t i) {
    const double t = time ? time->node(i / ns) : 0.0;
    values[i] = f(probe.spatial_node(i % ns), t);
  });
  return SampledField(grid, std::move(values));
}

std::size_t SampledField::spatial_count() const noexcept { return product(layout_, time_ ? 1 : 0); }

std::size_t SampledField::flat_index(std::span<const std::size_t> index) const {
  require(index.size() == layout_.size(), ErrorKind::dimension, "index rank mismatch");
  std::size_t flat = 0;
  for (std::size_t a = 0; a < layout_.size(); ++a) {
    require(index[a] < layout_[a].count, ErrorKind::domain, "index out of range");
    flat = flat * layout_[a].count + index[a];
  }
  return flat;
}

std::vector<double> SampledField::spatial_node(std::size_t s) const {
  const std::size_t first = time_ ? 1 : 0;
  std::vector<double> x(layout_.size() - first);
  for (std::size_t a = layout_.size(); a-- > first;) {
    x[a - first] = layout_[a].node(s % layout_[a].count);
    s /= layout_[a].count;
  }
  return x;
}

double SampledField::interpolate(std::span<const double> x, double t) const {
  const std::size_t first = time_ ? 1 : 0;
  const std::size_t rank = layout_.size();
  require(x.size() == rank - first, ErrorKind::dimension, "interpolation point has wrong dimension");
  std::array<std::size_t, 8> lower{};
  std::array<double, 8> theta{};
  require(rank <= lower.size(), ErrorKind::dimension, "field rank too large");
  for (std::size_t a = 0; a < rank; ++a) {
    const double c = a < first ? t : x[a - first];
    std::tie(lower[a], theta[a]) = locate(layout_[a], c);
  }
  double total = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << rank); ++corner) {
    double weight = 1.0;
    std::size_t flat = 0;
    for (std::size_t a = 0; a < rank; ++a) {
      const bool upper = (corner >> (rank - 1 - a)) & 1U;
      weight *= upper ? theta[a] : 1.0 - theta[a];
      flat = flat * layout_[a].count + lower[a] + (upper && layout_[a].count > 1 ? 1 : 0);
    }
    if (weight != 0.0) total += weight * values_[flat];
  }
  return total;
}

SampledField SampledField::time_slice(std::size_t n) const {
  require(time_.has_value(), ErrorKind::dimension, "field has no time axis");
  require(n < time_->count, ErrorKind::domain, "time index out of range");
  const std::size_t ns = spatial_count();
  std::vector<double> slice(values_.begin() + static_cast<long>(n * ns),
                            values_.begin() + static_cast<long>((n + 1) * ns));
  std::vector<Axis> spatial(layout_.begin() + 1, layout_.end());
  return SampledField(support_, grid_, std::nullopt, std::move(spatial), std::move(slice));
}

SampledField SampledField::boundary_slice() const {
  require(support_ == Support::bulk, ErrorKind::dimension, "field already lives on the boundary");
  const std::size_t nd = grid_.normal_axis().count;
  const std::size_t outer = values_.size() / nd;
  std::vector<double> slice(outer);
  for (std::size_t i = 0; i < outer; ++i) slice[i] = values_[i * nd];
  std::vector<Axis> tangential(layout_.begin() + (time_ ? 1 : 0), layout_.end() - 1);
  return SampledField(Support::boundary, grid_, time_, std::move(tangential), std::move(slice));
}

SampledField SampledField::map(const std::function<double(double)>& f) const {
  std::vector<double> mapped(values_.size());
  std::transform(values_.begin(), values_.end(), mapped.begin(), f);
  std::vector<Axis> spatial(layout_.begin() + (time_ ? 1 : 0), layout_.end());
  return SampledField(support_, grid_, time_, std::move(spatial), std::move(mapped));
}

std::vector<double> trapezoid_weights(const Axis& axis) {
  if (axis.count == 1) return {1.0};
  std::vector<double> w(axis.count, axis.step);
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

namespace {

double weighted_sum(const SampledField& f, const std::function<double(double)>& g) {
  const auto& layout = f.layout();
  std::vector<std::vector<double>> weights;
  for (const Axis& a : layout) weights.push_back(trapezoid_weights(a));
  const std::size_t inner = layout.back().count;
  const std::size_t rows = f.values().size() / inner;
  std::vector<double> row_sums(rows);
  const auto values = f.values();
  parallel_for(rows, [&](std::size_t r) {
    double w = 1.0;
    std::size_t rest = r;
    for (std::size_t a = layout.size() - 1; a-- > 0;) {
      w *= weights[a][rest % layout[a].count];
      rest /= layout[a].count;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < inner; ++i) s += weights.back()[i] * g(values[r * inner + i]);
    row_sums[r] = w * s;
  });
  return pairwise_sum(row_sums);
}

const SampledField& restrict_region(const SampledField& f, Region region, std::optional<SampledField>& holder) {
  if (region == Region::full || f.support() == Support::boundary) return f;
  holder.emplace(f.boundary_slice());
  return *holder;
}

}  // namespace

double integrate(const SampledField& f, Region region) {
  std::optional<SampledField> holder;
  const SampledField& g = restrict_region(f, region, holder);
  if (g.layout().empty()) return g.values().front();
  return weighted_sum(g, [](double v) { return v; });
}

double lp_norm(const SampledField& f, double p, Region region) {
  require(p >= 1.0, ErrorKind::invalid_parameter, "Lp norm needs p >= 1");
  std::optional<SampledField> holder;
  const SampledField& g = restrict_region(f, region, holder);
  if (std::isinf(p)) {
    double m = 0.0;
    for (double v : g.values()) m = std::max(m, std::abs(v));
    return m;
  }
  if (g.layout().empty()) return std::abs(g.values().front());
  const double s = weighted_sum(g, [p](double v) { return std::pow(std::abs(v), p); });
  return std::pow(s, 1.0 / p);
}

double convolve_half_space(const std::function<double(std::span<const double>)>& f, int dimension, double eta,
                           std::span<const double> x, QuadratureOptions options) {
  require(static_cast<int>(x.size()) == dimension, ErrorKind::dimension, "point has wrong dimension");
  const double step = aligned_step(eta, options.points_per_width);
  const Stencil1D tangential = value_stencil(StencilRole::symmetric, eta, step);
  const Stencil1D normal = value_stencil(StencilRole::forward, eta, step);
  std::vector<const Stencil1D*> stencils(x.size(), &tangential);
  stencils.back() = &normal;
  return tensor_quadrature(stencils, x, f);
}

double convolve_half_space(const SampledField& f, const HalfSpaceKernel& kernel, std::span<const double> x,
                           QuadratureOptions options) {
  require(f.support() == Support::bulk && !f.time(), ErrorKind::dimension,
          "half-space convolution needs a spatial bulk field");
  require(kernel.dimension() == f.grid().dimension(), ErrorKind::dimension, "kernel and grid dimensions differ");
  const double eta = kernel.eta();
  const auto& axes = f.grid().axes();
  require(x.size() == axes.size(), ErrorKind::dimension, "point has wrong dimension");
  for (std::size_t a = 0; a + 1 < axes.size(); ++a)
    check_fits(axes[a], x[a] - eta, x[a] + eta, ErrorKind::truncation, "tangential kernel support");
  check_fits(axes.back(), x.back(), x.back() + eta, ErrorKind::truncation, "normal kernel support");
  return convolve_half_space([&f](std::span<const double> y) { return f.interpolate(y); }, kernel.dimension(),
                             eta, x, options);
}

double convolve_standard(const SampledField& f, double eta, std::span<const double> x, QuadratureOptions options) {
  require(f.support() == Support::bulk && !f.time(), ErrorKind::dimension,
          "standard convolution needs a spatial bulk field");
  const auto& axes = f.grid().axes();
  require(x.size() == axes.size(), ErrorKind::dimension, "point has wrong dimension");
  for (std::size_t a = 0; a + 1 < axes.size(); ++a)
    check_fits(axes[a], x[a] - eta, x[a] + eta, ErrorKind::truncation, "tangential kernel support");
  check_fits(axes.back(), std::max(x.back() - eta, axes.back().lo), x.back() + eta, ErrorKind::truncation,
             "normal kernel support");
  const double step = aligned_step(eta, options.points_per_width);
  const Stencil1D s = value_stencil(StencilRole::symmetric, eta, step);
  std::vector<const Stencil1D*> stencils(x.size(), &s);
  const double floor_d = axes.back().lo;
  // Integrate over y_d >= floor only; a node on the floor is a trapezoid end.
  return tensor_quadrature(stencils, x, [&](std::span<const double> y) {
    if (y.back() < floor_d) return 0.0;
    const double v = f.interpolate(y);
    return y.back() == floor_d ? 0.5 * v : v;
  });
}

double convolve_boundary_spacetime(const SpaceTimeFunction& g, std::size_t tangential_dims, double eta,
                                   std::span<const double> tangential, double t, QuadratureOptions options) {
  require(tangential.size() == tangential_dims, ErrorKind::dimension, "boundary point has wrong dimension");
  const double step = aligned_step(eta, options.points_per_width);
  const Stencil1D sym = value_stencil(StencilRole::symmetric, eta, step);
  const Stencil1D fwd = value_stencil(StencilRole::forward, eta, step);
  std::vector<const Stencil1D*> stencils(tangential_dims + 1, &sym);
  stencils.front() = &fwd;
  std::vector<double> center;
  center.push_back(t);
  center.insert(center.end(), tangential.begin(), tangential.end());
  return tensor_quadrature(stencils, center, [&g](std::span<const double> p) { return g(p.subspan(1), p[0]); });
}

double convolve_boundary_spacetime(const SampledField& g, double eta, std::span<const double> tangential, double t,
                                   QuadratureOptions options) {
  require(g.support() == Support::boundary && g.time(), ErrorKind::dimension,
          "boundary space-time convolution needs a boundary field with a time axis");
  if (!(t + eta <= g.time()->hi() + 1e-12)) fail(ErrorKind::out_of_horizon, "t + eta = " + std::to_string(t + eta) + " exceeds the horizon T = " + std::to_string(g.time()->hi()));
  check_fits(*g.time(), t, t + eta, ErrorKind::out_of_horizon, "time kernel support");
  const auto& layout = g.layout();
  for (std::size_t a = 1; a < layout.size(); ++a)
    check_fits(layout[a], tangential[a - 1] - eta, tangential[a - 1] + eta, ErrorKind::truncation,
               "tangential kernel support");
  return convolve_boundary_spacetime([&g](std::span<const double> y, double s) { return g.interpolate(y, s); },
                                     g.spatial_dims(), eta, tangential, t, options);
}

}  // namespace halfmoll
