#include "halfmoll/geometry.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "halfmoll/error.hpp"
#include "halfmoll/parallel.hpp"

namespace halfmoll {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double radius_of(std::span<const double> x) { return std::hypot(x[0], x[1]); }

void check_point(std::span<const double> x) {
  require(x.size() == 2, ErrorKind::dimension, "curved domains are two-dimensional");
}

}  // namespace

SmoothDomain2D::SmoothDomain2D(DomainKind kind, double r1, double r2, double delta)
    : kind_(kind), r1_(r1), r2_(r2), delta_(delta) {}

SmoothDomain2D SmoothDomain2D::disk(double radius) {
  require(radius > 0.0, ErrorKind::invalid_parameter, "disk radius must be positive");
  return {DomainKind::disk, radius, radius, radius / 4.0};
}

SmoothDomain2D SmoothDomain2D::annulus(double inner, double outer) {
  require(inner > 0.0 && outer > inner, ErrorKind::invalid_parameter, "annulus needs 0 < R1 < R2");
  return {DomainKind::annulus, inner, outer, (outer - inner) / 4.0};
}

SmoothDomain2D SmoothDomain2D::half_plane(double band) {
  require(band > 0.0, ErrorKind::invalid_parameter, "band width must be positive");
  return {DomainKind::half_plane, 0.0, 0.0, band};
}

double SmoothDomain2D::component_length(int component) const {
  switch (kind_) {
    case DomainKind::disk: return kTwoPi * r1_;
    case DomainKind::annulus: return kTwoPi * (component == 0 ? r1_ : r2_);
    case DomainKind::half_plane: return std::numeric_limits<double>::infinity();
  }
  return 0.0;
}

int SmoothDomain2D::nearest_component(std::span<const double> x) const {
  if (kind_ != DomainKind::annulus) return 0;
  const double r = radius_of(x);
  return std::abs(r - r1_) <= std::abs(r - r2_) ? 0 : 1;
}

double SmoothDomain2D::signed_distance(std::span<const double> x) const {
  check_point(x);
  switch (kind_) {
    case DomainKind::disk: return radius_of(x) - r1_;
    case DomainKind::annulus: {
      const double r = radius_of(x);
      return std::max(r1_ - r, r - r2_);
    }
    case DomainKind::half_plane: return -x[1];
  }
  return 0.0;
}

Point2 SmoothDomain2D::project(std::span<const double> x) const {
  check_point(x);
  if (kind_ == DomainKind::half_plane) return {x[0], 0.0};
  const double r = radius_of(x);
  require(r > 0.0, ErrorKind::domain, "the centre has no unique boundary projection");
  const double target = kind_ == DomainKind::disk || nearest_component(x) == 1 ? r2_ : r1_;
  return {x[0] * target / r, x[1] * target / r};
}

double SmoothDomain2D::curvature(int component) const {
  switch (kind_) {
    case DomainKind::disk: return 1.0 / r1_;
    case DomainKind::annulus: return component == 0 ? -1.0 / r1_ : 1.0 / r2_;
    case DomainKind::half_plane: return 0.0;
  }
  return 0.0;
}

Point2 SmoothDomain2D::outward_normal(std::span<const double> p) const {
  check_point(p);
  if (kind_ == DomainKind::half_plane) return {0.0, -1.0};
  const double r = radius_of(p);
  const double sign = kind_ == DomainKind::annulus && nearest_component(p) == 0 ? -1.0 : 1.0;
  return {sign * p[0] / r, sign * p[1] / r};
}

double SmoothDomain2D::jacobian(std::span<const double> x) const {
  const double d = signed_distance(x);
  require(std::abs(d) < 2.0 * delta_, ErrorKind::domain, "point lies outside the tubular band");
  return 1.0 - curvature(nearest_component(x)) * (-d);
}

TubularPoint SmoothDomain2D::to_tubular(std::span<const double> x) const {
  const double depth = -signed_distance(x);
  const int c = nearest_component(x);
  if (kind_ == DomainKind::half_plane) return {0, x[0], depth};
  const double radius = kind_ == DomainKind::disk || c == 1 ? r2_ : r1_;
  return {c, radius * std::atan2(x[1], x[0]), depth};
}

Point2 SmoothDomain2D::from_tubular(const TubularPoint& p) const {
  if (kind_ == DomainKind::half_plane) return {p.arc, p.depth};
  const bool hole = kind_ == DomainKind::annulus && p.component == 0;
  const double radius = hole ? r1_ : r2_;
  const double r = hole ? radius + p.depth : radius - p.depth;
  const double angle = p.arc / radius;
  return {r * std::cos(angle), r * std::sin(angle)};
}

void SmoothDomain2D::check_bounds(std::span<const double> x) const {
  require(std::isfinite(x[0]) && std::isfinite(x[1]), ErrorKind::stability, "characteristic diverged");
}

void SmoothDomain2D::snap_to_boundary(std::span<double> x) const {
  const Point2 p = project(x);
  x[0] = p[0];
  x[1] = p[1];
}

double band_integral(const std::function<double(const Point2&)>& f, const SmoothDomain2D& domain, double width,
                     int arc_points) {
  require(domain.kind() != DomainKind::half_plane, ErrorKind::domain, "the half-plane band is unbounded");
  require(width > 0.0 && width < 2.0 * domain.tubular_width(), ErrorKind::domain, "width must lie inside the band");
  require(arc_points >= 8, ErrorKind::invalid_parameter, "too few arc points");
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  for (int c = 0; c < domain.component_count(); ++c) {
    const double length = domain.component_length(c);
    const double darc = length / arc_points;
    const double kappa = domain.curvature(c);
    std::vector<double> terms(static_cast<std::size_t>(arc_points));
    parallel_for(terms.size(), [&](std::size_t i) {
      const double arc = static_cast<double>(i) * darc;
      terms[i] = darc * gauss_kronrod<double, 61>::integrate(
                            [&](double s) { return f(domain.from_tubular({c, arc, s})) * (1.0 - kappa * s); }, 0.0,
                            width, 8, 1e-14);
    });
    total += pairwise_sum(terms);
  }
  return total;
}

namespace {

double tubular_quadrature(const std::function<double(const Point2&, double)>& u, const SmoothDomain2D& domain,
                          double eta, std::span<const double> x, double t, bool timed, MollifyOptions options) {
  check_point(x);
  require(eta > 0.0, ErrorKind::invalid_parameter, "eta must be positive");
  if (!(eta < domain.tubular_width())) fail(ErrorKind::scale_too_coarse, "eta must be below the tubular width " + std::to_string(domain.tubular_width()));
  const TubularPoint p = domain.to_tubular(x);
  require(p.depth >= -1e-12 && p.depth + eta < 2.0 * domain.tubular_width(), ErrorKind::domain,
          "kernel support leaves the tubular band");
  const double step = aligned_step(eta, options.points_per_width);
  std::vector<Stencil1D> storage;
  std::vector<double> centre;
  if (timed) {
    storage.push_back(value_stencil(StencilRole::forward, eta, step));
    centre.push_back(t);
  }
  storage.push_back(value_stencil(StencilRole::symmetric, eta, step));
  storage.push_back(value_stencil(StencilRole::forward, eta, step));
  centre.push_back(p.arc);
  centre.push_back(std::max(p.depth, 0.0));
  std::vector<const Stencil1D*> stencils;
  for (const Stencil1D& s : storage) stencils.push_back(&s);
  return tensor_quadrature(stencils, centre, [&](std::span<const double> z) {
    const double s = timed ? z[0] : t;
    const std::size_t off = timed ? 1 : 0;
    return u(domain.from_tubular({p.component, z[off], z[off + 1]}), s);
  });
}

}  // namespace

double tubular_mollify(const SpaceTimeFunction& u, const SmoothDomain2D& domain, double eta,
                       std::span<const double> x, double t, bool timed, MollifyOptions options) {
  return tubular_quadrature([&u](const Point2& y, double s) { return u(y, s); }, domain, eta, x, t, timed, options);
}

double tubular_mollify(const SampledField& u, const SmoothDomain2D& domain, double eta, std::span<const double> x,
                       double t, MollifyOptions options) {
  require(u.support() == Support::bulk && u.spatial_dims() == 2, ErrorKind::dimension,
          "tubular mollification needs a 2-D bulk field");
  const bool timed = u.time().has_value();
  if (timed)
    require(t >= u.time()->lo && t + eta <= u.time()->hi() * (1.0 + 1e-12) + 1e-12, ErrorKind::out_of_horizon,
            "time kernel support leaves the sampled horizon");
  return tubular_quadrature([&u](const Point2& y, double s) { return u.interpolate(y, s); }, domain, eta, x, t,
                            timed, options);
}

SampledField solve_curved(const VelocityFieldSpec& b, const SmoothDomain2D& domain, const StripGrid& grid,
                          const Axis& times, const SpaceTimeFunction& h, const SpaceTimeFunction& u0) {
  require(grid.dimension() == 2 && b.dimension() == 2, ErrorKind::dimension, "curved solver is two-dimensional");
  const double step = 0.5 * (times.count > 1 ? std::min(grid.spacing(), times.step) : grid.spacing());
  const std::size_t nx = grid.axes()[0].count;
  const std::size_t ny = grid.axes()[1].count;
  const std::size_t spatial = nx * ny;
  std::vector<double> values(times.count * spatial);
  parallel_for(values.size(), [&](std::size_t k) {
    const double t = times.node(k / spatial);
    const std::size_t s = k % spatial;
    std::array<double, 2> x{grid.axes()[0].node(s / ny), grid.axes()[1].node(s % ny)};
    const double d = domain.signed_distance(x);
    if (d > 2.0 * domain.tubular_width()) {
      values[k] = 0.0;
      return;
    }
    if (d > 0.0) x = domain.project(x);
    const CharacteristicTrace tr = trace_characteristic(b, domain, x, t, step);
    values[k] = tr.kind == TerminalKind::hit_boundary ? h(tr.terminal, tr.terminal_time) : u0(tr.terminal, 0.0);
  });
  return SampledField(grid, times, std::move(values));
}

CurvedTraceReport curved_trace_residual(const SampledField& u, const VelocityFieldSpec& b, const SpaceTimeFunction& h,
                                        double eta, const SmoothDomain2D& domain, MollifyOptions options) {
  require(u.time().has_value(), ErrorKind::dimension, "curved trace needs a time axis");
  require(domain.kind() != DomainKind::half_plane, ErrorKind::domain, "use the flat trace for the half-plane");
  require(eta < domain.tubular_width(), ErrorKind::scale_too_coarse, "eta must be below the tubular width");
  const Axis& ut = *u.time();
  const double last = ut.hi() - eta;
  require(last >= ut.lo, ErrorKind::out_of_horizon, "eta exceeds the time horizon");
  const auto steps = static_cast<std::size_t>(std::floor((last - ut.lo) / ut.step * (1.0 + 1e-12)));
  CurvedTraceReport report;
  report.times = Axis{ut.lo, ut.step, steps + 1};
  const double h_grid = u.grid().spacing();
  for (int c = 0; c < domain.component_count(); ++c) {
    const double length = domain.component_length(c);
    const auto n = static_cast<std::size_t>(std::max(8.0, std::round(length / h_grid)));
    report.arcs.push_back(Axis{-0.5 * length, length / static_cast<double>(n), n});
  }
  std::vector<double> weights_t = trapezoid_weights(report.times);
  const double tstep = aligned_step(eta, options.points_per_width);
  const Stencil1D arc_kernel = value_stencil(StencilRole::symmetric, eta, tstep);
  const Stencil1D time_kernel = value_stencil(StencilRole::forward, eta, tstep);
  std::vector<double> terms;
  for (int c = 0; c < domain.component_count(); ++c) {
    const Axis& arcs = report.arcs[static_cast<std::size_t>(c)];
    const std::size_t count = report.times.count * arcs.count;
    std::vector<double> residual(count);
    std::vector<double> weighted(count);
    auto flux = [&](double arc, double s) {
      const Point2 p = domain.from_tubular({c, arc, 0.0});
      const Point2 nu = domain.outward_normal(p);
      const std::vector<double> bp = b.value(p, s);
      return bp[0] * nu[0] + bp[1] * nu[1];
    };
    parallel_for(count, [&](std::size_t k) {
      const std::size_t it = k / arcs.count;
      const double t = report.times.node(it);
      const double arc = arcs.node(k % arcs.count);
      const Point2 p = domain.from_tubular({c, arc, 0.0});
      const double lhs = tubular_mollify(u, domain, eta, p, t, options) * flux(arc, t);
      const std::array<const Stencil1D*, 2> st{&time_kernel, &arc_kernel};
      const std::array<double, 2> centre{t, arc};
      const double rhs = tensor_quadrature(st, centre, [&](std::span<const double> z) {
        return h(domain.from_tubular({c, z[1], 0.0}), z[0]) * flux(z[1], z[0]);
      });
      residual[k] = lhs - rhs;
      weighted[k] = std::abs(lhs - rhs) * weights_t[it] * arcs.step;
    });
    report.residual.insert(report.residual.end(), residual.begin(), residual.end());
    terms.insert(terms.end(), weighted.begin(), weighted.end());
  }
  report.l1_norm = pairwise_sum(terms);
  return report;
}

VelocityFieldSpec radial_inflow() {
  auto value = [](std::span<const double> x, double, std::span<double> out) {
    const double r = radius_of(x);
    out[0] = r > 0.0 ? -x[0] / r : 0.0;
    out[1] = r > 0.0 ? -x[1] / r : 0.0;
  };
  // d(-x_i/r)/dx_j = -(delta_ij r^2 - x_i x_j) / r^3
  auto gradient = [](std::span<const double> x, double, std::span<double> out) {
    const double r = radius_of(x);
    if (r == 0.0) {
      std::fill(out.begin(), out.end(), 0.0);
      return;
    }
    const double r3 = r * r * r;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        out[static_cast<std::size_t>(i * 2 + j)] = -((i == j ? r * r : 0.0) - x[i] * x[j]) / r3;
  };
  auto divergence = [](std::span<const double> x, double) {
    const double r = radius_of(x);
    return r > 0.0 ? -1.0 / r : 0.0;
  };
  return VelocityFieldSpec(2, value, gradient, divergence, false, 1.0, {"radial_inflow", "smooth away from 0", true});
}

}  // namespace halfmoll
