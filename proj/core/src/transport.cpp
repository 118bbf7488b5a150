#include "halfmoll/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "halfmoll/error.hpp"
#include "halfmoll/parallel.hpp"

namespace halfmoll {
namespace {

constexpr double kExitTolerance = 1e-10;
constexpr double kTieFraction = 1e-12;

// One classical RK4 step of dX/ds = b(X, s) from (x, s) with signed step ds.
class Rk4 {
 public:
  explicit Rk4(const VelocityFieldSpec& b)
      : b_(b), n_(static_cast<std::size_t>(b.dimension())), k_(4, std::vector<double>(n_)), tmp_(n_) {}

  void step(std::span<const double> x, double s, double ds, std::span<double> out) {
    b_.value(x, s, k_[0]);
    stage(x, k_[0], 0.5 * ds);
    b_.value(tmp_, s + 0.5 * ds, k_[1]);
    stage(x, k_[1], 0.5 * ds);
    b_.value(tmp_, s + 0.5 * ds, k_[2]);
    stage(x, k_[2], ds);
    b_.value(tmp_, s + ds, k_[3]);
    for (std::size_t i = 0; i < n_; ++i)
      out[i] = x[i] + ds / 6.0 * (k_[0][i] + 2.0 * k_[1][i] + 2.0 * k_[2][i] + k_[3][i]);
    for (std::size_t i = 0; i < n_; ++i)
      require(std::isfinite(out[i]), ErrorKind::stability, "characteristic integration produced a non-finite value");
  }

 private:
  void stage(std::span<const double> x, const std::vector<double>& k, double h) {
    for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x[i] + h * k[i];
  }

  const VelocityFieldSpec& b_;
  std::size_t n_;
  std::vector<std::vector<double>> k_;
  std::vector<double> tmp_;
};

double integration_step(const StripGrid& grid, const Axis& times) {
  const double h = grid.spacing();
  return 0.5 * (times.count > 1 ? std::min(h, times.step) : h);
}

std::size_t total_count(const std::vector<Axis>& axes) {
  return std::accumulate(axes.begin(), axes.end(), std::size_t{1},
                         [](std::size_t n, const Axis& a) { return n * a.count; });
}

// bump(s) = exp(-1/(1-s^2)) and its derivative.
double bump(double s) { return std::abs(s) < 1.0 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }
double bump_slope(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return bump(s) * (-2.0 * s / (q * q));
}

// sup |bump'| by golden-section search on (0, 1).
double bump_slope_peak() {
  static const double peak = [] {
    double a = 0.0;
    double b = 1.0;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 0; i < 200; ++i) {
      const double c = b - g * (b - a);
      const double d = a + g * (b - a);
      if (std::abs(bump_slope(c)) > std::abs(bump_slope(d)))
        b = d;
      else
        a = c;
    }
    return std::abs(bump_slope(0.5 * (a + b)));
  }();
  return peak;
}

}  // namespace

StripDomain::StripDomain(const StripGrid& grid) : axes_(grid.axes()) {}

void StripDomain::check_bounds(std::span<const double> x) const {
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const double slack = 1e-12 * std::max(1.0, std::abs(axes_[a].hi()));
    const bool lower_ok = a + 1 == axes_.size() || x[a] >= axes_[a].lo - slack;
    require(lower_ok && x[a] <= axes_[a].hi() + slack, ErrorKind::truncation,
            "characteristic left the computational box; enlarge the strip");
  }
}

CharacteristicTrace trace_characteristic(const VelocityFieldSpec& b, const TransportDomain& domain,
                                         std::span<const double> x, double t, double step) {
  const int d = domain.dimension();
  require(b.dimension() == d && static_cast<int>(x.size()) == d, ErrorKind::dimension,
          "characteristic start has wrong dimension");
  require(step > 0.0 && t >= 0.0, ErrorKind::invalid_parameter, "characteristic step and time must be positive");
  require(domain.depth(x) >= -1e-12, ErrorKind::domain, "characteristic must start inside the domain");
  domain.check_bounds(x);
  CharacteristicTrace trace;
  trace.start.assign(x.begin(), x.end());
  trace.start_time = t;
  std::vector<double> current(x.begin(), x.end());
  std::vector<double> next(current.size());
  Rk4 rk(b);
  double s = t;
  while (s > 0.0) {
    const double ds = std::min(step, s);
    rk.step(current, s, -ds, next);
    ++trace.steps;
    if (domain.depth(next) < 0.0) {
      // Bisect on the fraction of the step taken before the crossing.
      double inside = 0.0;
      double outside = 1.0;
      std::vector<double> probe(current.size());
      std::vector<double> last_inside = current;
      while ((outside - inside) * ds > 1e-14) {
        const double mid = 0.5 * (inside + outside);
        rk.step(current, s, -mid * ds, probe);
        if (domain.depth(probe) >= 0.0) {
          inside = mid;
          last_inside = probe;
          if (domain.depth(probe) <= kExitTolerance * 1e-2) break;
        } else {
          outside = mid;
        }
      }
      const double exit_time = s - inside * ds;
      if (exit_time <= kTieFraction * std::max(t, 1.0)) {
        current = last_inside;
        s = 0.0;
        break;
      }
      domain.snap_to_boundary(last_inside);
      trace.kind = TerminalKind::hit_boundary;
      trace.terminal = std::move(last_inside);
      trace.terminal_time = exit_time;
      return trace;
    }
    domain.check_bounds(next);
    std::swap(current, next);
    s -= ds;
  }
  trace.kind = TerminalKind::hit_initial_plane;
  trace.terminal = std::move(current);
  trace.terminal_time = 0.0;
  return trace;
}

SampledField solve_characteristics(const VelocityFieldSpec& b, const TransportDomain& domain, const StripGrid& grid,
                                   const Axis& times, const BoundaryValue& boundary, const SpaceTimeFunction& initial,
                                   const std::function<bool(std::span<const double>)>& active) {
  require(b.dimension() == grid.dimension() && domain.dimension() == grid.dimension(), ErrorKind::dimension,
          "field, domain and grid dimensions differ");
  require(times.lo >= 0.0, ErrorKind::invalid_parameter, "times must start at t >= 0");
  const double step = integration_step(grid, times);
  const std::size_t spatial = total_count(grid.axes());
  std::vector<double> values(times.count * spatial);
  parallel_for(values.size(), [&](std::size_t k) {
    const double t = times.node(k / spatial);
    std::vector<double> x(grid.axes().size());
    std::size_t rest = k % spatial;
    for (std::size_t a = x.size(); a-- > 0;) {
      x[a] = grid.axes()[a].node(rest % grid.axes()[a].count);
      rest /= grid.axes()[a].count;
    }
    if (active && !active(x)) {
      values[k] = 0.0;
      return;
    }
    const CharacteristicTrace tr = trace_characteristic(b, domain, x, t, step);
    values[k] = tr.kind == TerminalKind::hit_boundary ? boundary(tr.terminal, tr.terminal_time)
                                                      : initial(tr.terminal, 0.0);
  });
  return SampledField(grid, times, std::move(values));
}

SampledField solve_characteristics(const VelocityFieldSpec& b, const SpaceTimeFunction& h,
                                   const SpaceTimeFunction& u0, const StripGrid& grid, const Axis& times) {
  const StripDomain domain(grid);
  const BoundaryValue on_face = [&h](std::span<const double> p, double t) {
    return h(p.first(p.size() - 1), t);
  };
  return solve_characteristics(b, domain, grid, times, on_face, u0);
}

TestFunction::TestFunction(std::string id, std::vector<double> centre, std::vector<double> radii)
    : id_(std::move(id)), centre_(std::move(centre)), radii_(std::move(radii)) {
  require(centre_.size() == radii_.size() && centre_.size() >= 2, ErrorKind::dimension,
          "test function needs a centre and radius per (t, x) axis");
  for (double r : radii_) require(r > 0.0, ErrorKind::invalid_parameter, "test function radii must be positive");
}

double TestFunction::value(std::span<const double> x, double t) const {
  double v = bump((t - centre_[0]) / radii_[0]);
  for (std::size_t a = 0; a < x.size() && v != 0.0; ++a) v *= bump((x[a] - centre_[a + 1]) / radii_[a + 1]);
  return v;
}

void TestFunction::gradient(std::span<const double> x, double t, std::span<double> out) const {
  const std::size_t n = centre_.size();
  std::vector<double> s(n);
  s[0] = (t - centre_[0]) / radii_[0];
  for (std::size_t a = 1; a < n; ++a) s[a] = (x[a - 1] - centre_[a]) / radii_[a];
  for (std::size_t k = 0; k < n; ++k) {
    double g = bump_slope(s[k]) / radii_[k];
    for (std::size_t a = 0; a < n && g != 0.0; ++a)
      if (a != k) g *= bump(s[a]);
    out[k] = g;
  }
}

double TestFunction::c1_norm() const {
  const double peak = std::exp(-1.0);
  const double rest = std::pow(peak, static_cast<double>(centre_.size() - 1));
  double norm = std::pow(peak, static_cast<double>(centre_.size()));
  for (double r : radii_) norm += bump_slope_peak() / r * rest;
  return norm;
}

std::vector<TestFunction> front_test_functions(double half_width, double depth, double horizon) {
  require(half_width >= 0.5 && depth >= 1.0 && horizon >= 0.6, ErrorKind::invalid_parameter,
          "front corpus expects a strip at least [-0.5, 0.5] x [0, 1] and T >= 0.6");
  // x_d-independent near the face: wide in x_d and centred on it.
  return {
      TestFunction("across_front", {0.35, 0.0, 0.35}, {0.15, 0.2, 0.15}),
      TestFunction("boundary_layer", {0.25, 0.0, 0.0}, {0.15, 0.25, 0.6}),
      TestFunction("initial_plane", {0.0, 0.0, 0.45}, {0.2, 0.2, 0.2}),
      TestFunction("ahead_of_front", {0.2, 0.1, 0.7}, {0.15, 0.2, 0.2}),
      TestFunction("tangential_offset", {0.4, 0.25, 0.3}, {0.15, 0.15, 0.2}),
  };
}

namespace {

// The weak functional on the sub-lattice with every `stride`-th node.
double weak_functional(const SampledField& u, const VelocityFieldSpec& b, const SpaceTimeFunction& h,
                       const SpaceTimeFunction& u0, const TestFunction& phi, std::size_t stride) {
  const Axis& times = *u.time();
  std::vector<Axis> axes;  // (t, x...) sub-lattice
  for (const Axis& a : u.layout())
    axes.push_back(Axis{a.lo, a.step * static_cast<double>(stride), (a.count - 1) / stride + 1});
  const std::size_t d = u.spatial_dims();
  std::vector<std::vector<double>> weights;
  for (const Axis& a : axes) weights.push_back(trapezoid_weights(a));
  const std::size_t spatial = total_count(std::vector<Axis>(axes.begin() + 1, axes.end()));

  // Interior term: -u (d_t phi + b . grad phi + phi div b).
  std::vector<double> interior(axes[0].count * spatial);
  parallel_for(interior.size(), [&](std::size_t k) {
    std::vector<std::size_t> index(d + 1);
    std::vector<double> x(d);
    std::size_t rest = k;
    double w = 1.0;
    for (std::size_t a = d + 1; a-- > 0;) {
      index[a] = rest % axes[a].count;
      rest /= axes[a].count;
      w *= weights[a][index[a]];
      if (a > 0) x[a - 1] = axes[a].node(index[a]);
    }
    const double t = axes[0].node(index[0]);
    const double p = phi.value(x, t);
    std::vector<double> g(d + 1);
    phi.gradient(x, t, g);
    if (p == 0.0 && std::all_of(g.begin(), g.end(), [](double v) { return v == 0.0; })) {
      interior[k] = 0.0;
      return;
    }
    for (auto& i : index) i *= stride;
    const double uv = u.at(index);
    const std::vector<double> bx = b.value(x, t);
    double flux = g[0];
    for (std::size_t a = 0; a < d; ++a) flux += bx[a] * g[a + 1];
    flux += p * b.divergence(x, t);
    interior[k] = -w * uv * flux;
  });

  // Initial term: -int u0 phi(., 0).
  std::vector<double> initial(spatial);
  parallel_for(spatial, [&](std::size_t k) {
    std::vector<double> x(d);
    std::size_t rest = k;
    double w = 1.0;
    for (std::size_t a = d + 1; a-- > 1;) {
      const std::size_t i = rest % axes[a].count;
      rest /= axes[a].count;
      w *= weights[a][i];
      x[a - 1] = axes[a].node(i);
    }
    const double p = phi.value(x, times.lo);
    initial[k] = p == 0.0 ? 0.0 : -w * u0(x, 0.0) * p;
  });

  // Boundary term: int int h (b . nu) phi over x_d = 0.
  const std::size_t face = spatial / axes.back().count;
  std::vector<double> boundary(axes[0].count * face);
  parallel_for(boundary.size(), [&](std::size_t k) {
    std::vector<double> x(d, 0.0);
    std::size_t rest = k % face;
    double w = 1.0;
    for (std::size_t a = d; a-- > 1;) {
      const std::size_t i = rest % axes[a].count;
      rest /= axes[a].count;
      w *= weights[a][i];
      x[a - 1] = axes[a].node(i);
    }
    const std::size_t it = k / face;
    w *= weights[0][it];
    const double t = axes[0].node(it);
    const double p = phi.value(x, t);
    const std::span<const double> tangential(x.data(), d - 1);
    boundary[k] = p == 0.0 ? 0.0 : w * h(tangential, t) * normal_trace(b, tangential, t) * p;
  });
  return pairwise_sum(interior) + pairwise_sum(initial) + pairwise_sum(boundary);
}

}  // namespace

WeakResidualReport weak_residual(const SampledField& u, const VelocityFieldSpec& b, const SpaceTimeFunction& h,
                                 const SpaceTimeFunction& u0, const TestFunction& phi) {
  require(u.support() == Support::bulk && u.time().has_value(), ErrorKind::dimension,
          "weak residual needs a bulk field with a time axis");
  require(u.grid().is_half_space(), ErrorKind::domain, "weak residual needs the face x_d = 0 in the grid");
  const std::size_t d = u.spatial_dims();
  require(phi.dimension() == static_cast<int>(d) && b.dimension() == static_cast<int>(d), ErrorKind::dimension,
          "test function, field and solution dimensions differ");
  const Axis& times = *u.time();
  require(times.lo == 0.0, ErrorKind::domain, "weak residual needs the time axis to start at 0");
  const double tol = 1e-12;
  require(phi.support_hi(0) <= times.hi() + tol, ErrorKind::coverage,
          "test function support reaches past the time horizon");
  for (std::size_t a = 0; a < d; ++a) {
    const Axis& axis = u.layout()[a + 1];
    const bool normal = a + 1 == d;
    require((normal || phi.support_lo(a + 1) >= axis.lo - tol) && phi.support_hi(a + 1) <= axis.hi() + tol,
            ErrorKind::coverage, "test function support exceeds the grid");
  }
  WeakResidualReport report;
  report.test_function = phi.id();
  report.c1_norm = phi.c1_norm();
  report.value = weak_functional(u, b, h, u0, phi, 1);
  bool even = true;
  for (const Axis& a : u.layout()) even = even && (a.count - 1) % 2 == 0 && a.count >= 3;
  report.error_estimate = even ? std::abs(report.value - weak_functional(u, b, h, u0, phi, 2)) / 3.0
                               : std::numeric_limits<double>::quiet_NaN();
  return report;
}

SampledField renormalize(const SampledField& u, const RelabelFunction& theta) {
  return u.map([&theta](double v) { return theta(v); });
}

bool GronwallReport::holds(double slack) const {
  return std::all_of(rows.begin(), rows.end(),
                     [slack](const GronwallRow& r) { return r.energy <= slack * r.bound + 1e-14; });
}

double GronwallReport::repair_factor() const {
  double factor = 0.0;
  for (const GronwallRow& r : rows) {
    if (r.bound > 0.0)
      factor = std::max(factor, r.energy / r.bound);
    else if (r.energy > 0.0)
      return std::numeric_limits<double>::infinity();
  }
  return factor;
}

GronwallReport gronwall_check(const SampledField& u, const VelocityFieldSpec& b, const SpaceTimeFunction& h,
                              double p) {
  require(u.time().has_value(), ErrorKind::dimension, "Gronwall check needs a time axis");
  require(p >= 1.0 && std::isfinite(p), ErrorKind::invalid_parameter, "Gronwall check needs finite p >= 1");
  const Axis& times = *u.time();
  const StripGrid& grid = u.grid();
  const std::size_t d = static_cast<std::size_t>(grid.dimension());
  GronwallReport report;
  report.p = p;

  double div_sup = 0.0;
  double b_sup = 0.0;
  std::vector<double> bx(d);
  for (std::size_t n = 0; n < times.count; ++n) {
    const double t = times.node(n);
    const SampledField slice = u.time_slice(n);
    for (std::size_t s = 0; s < slice.spatial_count(); ++s) {
      const std::vector<double> x = slice.spatial_node(s);
      div_sup = std::max(div_sup, std::abs(b.divergence(x, t)));
      b.value(x, t, bx);
      b_sup = std::max(b_sup, std::sqrt(std::inner_product(bx.begin(), bx.end(), bx.begin(), 0.0)));
    }
  }
  if (b.sup_bound()) b_sup = std::max(b_sup, *b.sup_bound());

  // sup_t ||h(t)||_p^p over the face.
  std::vector<Axis> face(grid.axes().begin(), grid.axes().end() - 1);
  std::vector<std::vector<double>> weights;
  for (const Axis& a : face) weights.push_back(trapezoid_weights(a));
  const std::size_t face_count = total_count(face);
  double h_sup = 0.0;
  for (std::size_t n = 0; n < times.count; ++n) {
    const double t = times.node(n);
    std::vector<double> terms(face_count);
    for (std::size_t k = 0; k < face_count; ++k) {
      std::vector<double> x(face.size());
      std::size_t rest = k;
      double w = 1.0;
      for (std::size_t a = face.size(); a-- > 0;) {
        const std::size_t i = rest % face[a].count;
        rest /= face[a].count;
        x[a] = face[a].node(i);
        w *= weights[a][i];
      }
      terms[k] = w * std::pow(std::abs(h(x, t)), p);
    }
    h_sup = std::max(h_sup, pairwise_sum(terms));
  }
  report.m1 = div_sup;
  report.m2 = b_sup * h_sup;

  const double start = std::pow(lp_norm(u.time_slice(0), p), p);
  for (std::size_t n = 0; n < times.count; ++n) {
    const double t = times.node(n);
    const double energy = std::pow(lp_norm(u.time_slice(n), p), p);
    const double bound = (start + report.m2 * t) * std::exp(report.m1 * t);
    report.rows.push_back(GronwallRow{t, energy, bound});
  }
  return report;
}

ConvergenceReport UniquenessReport::as_convergence() const {
  ConvergenceReport r;
  r.field_name = "uniqueness";
  r.p = p;
  r.beta = std::numeric_limits<double>::quiet_NaN();
  r.alpha = p;
  for (std::size_t k = 0; k < differences.size(); ++k) {
    const double ratio = k + 1 < differences.size() && differences[k + 1] > 0.0
                             ? differences[k] / differences[k + 1]
                             : std::numeric_limits<double>::quiet_NaN();
    r.rows.push_back(ConvergenceRow{etas[k], differences[k], ratio, 0.0});
  }
  return r;
}

UniquenessReport uniqueness_experiment(const VelocityFieldSpec& b, const ScalarDataSpec& data,
                                       std::span<const double> etas, const StripGrid& grid, const Axis& times,
                                       const SpaceTimeFunction& outflow_perturbation) {
  require(etas.size() >= 2, ErrorKind::invalid_parameter, "uniqueness experiment needs at least two scales");
  require(data.p >= 1.0 && std::isfinite(data.p), ErrorKind::invalid_parameter, "p must be finite and >= 1");
  UniquenessReport report;
  report.p = data.p;
  report.etas.assign(etas.begin(), etas.end());
  for (std::size_t n = 0; n < times.count; ++n) report.times.push_back(times.node(n));

  auto solve_at = [&](double eta, const SpaceTimeFunction& h) {
    ScalarDataSpec spec = data;
    spec.boundary = h;
    const MollifiedData m = mollify_data(b, spec, eta);
    return solve_characteristics(m.velocity, m.boundary, m.initial, grid, times);
  };

  std::vector<SampledField> solutions;
  for (double eta : etas) solutions.push_back(solve_at(eta, data.boundary));
  for (std::size_t k = 0; k + 1 < solutions.size(); ++k) {
    const SampledField& a = solutions[k];
    const SampledField& c = solutions[k + 1];
    std::vector<double> diff(a.values().size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a.values()[i] - c.values()[i];
    const SampledField delta(grid, times, std::move(diff));
    report.differences.push_back(lp_norm(delta, data.p));
    std::vector<double> slices;
    for (std::size_t n = 0; n < times.count; ++n) slices.push_back(lp_norm(delta.time_slice(n), data.p));
    report.slice_differences.push_back(std::move(slices));
  }

  if (outflow_perturbation) {
    const SpaceTimeFunction h = data.boundary;
    const SpaceTimeFunction perturbed = [&](std::span<const double> x, double t) {
      const double base = h(x, t);
      return normal_trace(b, x, t) >= 0.0 ? base + outflow_perturbation(x, t) : base;
    };
    // Unmollified b: the outflow set is that of b itself.
    const SampledField reference = solve_characteristics(b, h, data.initial, grid, times);
    const SampledField changed = solve_characteristics(b, perturbed, data.initial, grid, times);
    for (std::size_t i = 0; i < reference.values().size(); ++i) {
      const double diff = std::abs(reference.values()[i] - changed.values()[i]);
      report.outflow_max_difference = std::max(report.outflow_max_difference, diff);
      if (reference.values()[i] != changed.values()[i]) ++report.outflow_changed_nodes;
    }
  }
  return report;
}

}  // namespace halfmoll
