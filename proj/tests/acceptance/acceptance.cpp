// Acceptance suite: one line per criterion, nonzero exit on any unexpected
// outcome. `--expect-fail N` marks criterion N as a known failure; it still
// prints FAIL, but only an unexpected pass or fail changes the exit code.
// `--only N` runs a single criterion.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "halfmoll/error.hpp"
#include "halfmoll/geometry.hpp"
#include "halfmoll/kernels.hpp"
#include "halfmoll/mollify.hpp"
#include "halfmoll/relabel.hpp"
#include "halfmoll/transport.hpp"

namespace hm = halfmoll;
using boost::math::quadrature::gauss_kronrod;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4)));
};

void Outcome::require(bool ok, const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  if (!detail.empty()) detail += "; ";
  detail += buf;
  if (!ok) {
    detail += " [x]";
    pass = false;
  }
}

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

double gk(const std::function<double(double)>& f, double a, double b) {
  return gauss_kronrod<double, 61>::integrate(f, a, b, 8, 1e-12);
}

// One fixed 61-point rule: the kernels are smooth and flat at their support ends.
double rule(const std::function<double(double)>& f, double a, double b) {
  return gauss_kronrod<double, 61>::integrate(f, a, b, 0, 0.0);
}

hm::SpaceTimeFunction gaussian(double cx, double cy, double var) {
  return [=](std::span<const double> x, double) {
    const double dx = x[0] - cx;
    const double dy = x[1] - cy;
    return std::exp(-(dx * dx + dy * dy) / (2.0 * var));
  };
}

const hm::SpaceTimeFunction kOne = [](std::span<const double>, double) { return 1.0; };
const hm::SpaceTimeFunction kZero = [](std::span<const double>, double) { return 0.0; };

// 1 -------------------------------------------------------------------------

Outcome kernel_normalization() {
  Outcome out;
  Stopwatch clock;
  double worst = 0.0;
  for (double eta : {1.0, 0.1, 0.01}) {
    const double sym = rule([&](double x) { return hm::eval_symmetric(x, eta); }, -eta, eta);
    const double one = rule([&](double x) { return hm::eval_one_sided(x, eta); }, 0.0, eta);
    // Tensor kernel in d = 2 and d = 3 (normal factor on [-eta, 0]).
    const double tensor2 = rule(
        [&](double x0) {
          return rule(
              [&](double x1) {
                const double p[2] = {x0, x1};
                return hm::eval_half_space_kernel(p, eta, 2);
              },
              -eta, 0.0);
        },
        -eta, eta);
    const double tensor3 = rule(
        [&](double x0) {
          return rule(
              [&](double x1) {
                return rule(
                    [&](double x2) {
                      const double p[3] = {x0, x1, x2};
                      return hm::eval_half_space_kernel(p, eta, 3);
                    },
                    -eta, 0.0);
              },
              -eta, eta);
        },
        -eta, eta);
    const double boundary_time = rule(
        [&](double x0) {
          return rule(
              [&](double t) {
                const double tangential[1] = {x0};
                return hm::eval_boundary_time_kernel(tangential, t, eta);
              },
              -eta, 0.0);
        },
        -eta, eta);
    for (double m : {sym, one, tensor2, tensor3, boundary_time}) worst = std::max(worst, std::abs(m - 1.0));
  }
  const double elapsed = clock.seconds();
  out.require(worst <= 1e-8, "max |mass - 1| = %.2e", worst);
  out.require(elapsed < 1.0, "runtime %.2f s", elapsed);
  return out;
}

// 2 -------------------------------------------------------------------------

Outcome boundary_defect() {
  Outcome out;
  const hm::StripGrid line(1, 0.0, 1.0, 1.0 / 1024);
  const auto one = hm::SampledField::sample(line, std::nullopt, kOne);
  const std::vector<double> origin{0.0};
  for (double eta : {0.1, 0.01}) {
    const double standard = hm::convolve_standard(one, eta, origin);
    const double tailored = hm::convolve_half_space(one, hm::HalfSpaceKernel(1, eta), origin);
    out.require(std::abs(standard - 0.5) <= 1e-3, "eta=%g standard %.12f", eta, standard);
    out.require(std::abs(tailored - 1.0) <= 1e-8, "tailored %.12f", tailored);
  }
  return out;
}

// 3 -------------------------------------------------------------------------

Outcome commutator_oracle() {
  Outcome out;
  const hm::StripGrid grid(2, 0.5, 1.0, 1.0 / 32);
  const auto u = gaussian(0.1, 0.3, 0.02);
  double worst = 0.0;
  for (const char* name : {"constant", "constant(0.5, -1)"}) {
    const auto r = hm::commutator_field(u, hm::builtin_field(name, 2), 0.125, grid);
    worst = std::max(worst, hm::lp_norm(r, std::numeric_limits<double>::infinity()));
  }
  out.require(worst <= 1e-8, "constant b max |r| = %.2e", worst);

  const double eta = 0.1;
  const auto b = hm::builtin_field("compressive(1)", 1);
  const hm::SpaceTimeFunction ramp = [](std::span<const double> y, double) { return y[0]; };
  double err = 0.0;
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> x{0.02 * i};
    const auto r = hm::commutator(ramp, b, eta, x, 0.0);
    err = std::max(err, std::abs(r.value - eta * hm::moment(1)));
  }
  out.require(err <= 1e-6, "u=y, b=y max |r - eta m1| = %.2e", err);
  return out;
}

// 4 -------------------------------------------------------------------------

Outcome commutator_convergence() {
  Outcome out;
  Stopwatch clock;
  const auto b = hm::builtin_field("rough_power(0.5)", 2);
  const hm::StripGrid grid(2, 0.75, 1.5, 1.0 / 256);
  const std::vector<double> etas{0.2, 0.1, 0.05, 0.025};
  const auto report = hm::commutator_convergence(gaussian(0.0, 0.5, 0.01), b, 2.0, 2.0, etas, grid);
  const double elapsed = clock.seconds();
  std::string norms;
  for (const auto& row : report.rows) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%.4e", norms.empty() ? "" : " ", row.norm);
    norms += buf;
  }
  out.require(report.norm_decreasing(), "norms %s", norms.c_str());
  out.require(report.decay_ratio() < 0.3, "final/initial %.3f", report.decay_ratio());
  out.require(report.ratio_growth() <= 2.0, "bound ratio growth %.3f", report.ratio_growth());
  out.require(elapsed < 120.0, "runtime %.1f s", elapsed);
  return out;
}

// 5 -------------------------------------------------------------------------

Outcome interchange() {
  Outcome out;
  const auto u = gaussian(0.0, 1.0, 0.01);
  const auto v = gaussian(0.1, 1.05, 0.01);
  const auto rotation = hm::builtin_field("rigid_rotation", 2);
  const auto compressive = hm::builtin_field("compressive(1)", 2);
  const double eta = 0.125;
  std::vector<double> plain;
  std::vector<double> general;
  for (double h : {1.0 / 16, 1.0 / 32}) {
    const hm::StripGrid grid(2, 1.25, 2.0, h);
    plain.push_back(hm::interchange_residual(u, v, rotation, eta, grid).relative());
    general.push_back(hm::generalized_interchange_residual(u, v, compressive, eta, grid).relative());
  }
  constexpr double kFloor = 1e-12;
  for (const auto& [label, r] : {std::pair{"rotation", plain}, std::pair{"compressive", general}}) {
    out.require(r[0] <= 1e-6 && r[1] <= 1e-6, "%s relative %.2e -> %.2e", label, r[0], r[1]);
    const bool stable = r[1] * 3.0 <= r[0] || std::max(r[0], r[1]) <= kFloor;
    out.require(stable, "%s halving %s", label, std::max(r[0], r[1]) <= kFloor ? "at roundoff floor" : "shrinks");
  }
  return out;
}

// 6 -------------------------------------------------------------------------

Outcome trace_formulas() {
  Outcome out;
  const double h = 1.0 / 256;
  const double dt = h;
  const hm::StripGrid grid(2, 0.5, 0.25, h);
  const auto times = hm::time_axis(0.25, dt);
  const auto b = hm::builtin_field("constant", 2);
  std::vector<double> boundary_norms;
  for (double eta : {1.0 / 16, 1.0 / 32}) {
    const auto data = hm::mollify_data(b, hm::ScalarDataSpec{kZero, kOne, 2.0, 0.0}, eta / 4);
    const auto u = hm::solve_characteristics(data.velocity, data.boundary, data.initial, grid, times);
    const auto boundary = hm::boundary_trace_residual(u, b, kOne, eta);
    const auto initial = hm::initial_trace_residual(u, kZero, eta, 2.0);
    const double budget = 5.0 * (h * h + eta * dt + hm::kSolverTolerance);
    out.require(boundary.norm < budget, "eta=%g boundary L1 %.3e vs %.3e", eta, boundary.norm, budget);
    out.require(initial.norm < budget, "initial L2 %.3e", initial.norm);
    boundary_norms.push_back(boundary.norm);
  }
  // The eta-dependent part of the residual should scale with eta: ratio 1/2 within 20%.
  const double ratio = boundary_norms[1] / boundary_norms[0];
  out.require(ratio >= 0.4 && ratio <= 0.6, "halving ratio %.3f", ratio);
  return out;
}

// 7, 8 ----------------------------------------------------------------------

struct FrontProblem {
  double h = 1.0 / 64;
  hm::StripGrid grid{2, 0.5, 1.0, 1.0 / 64};
  hm::Axis times = hm::time_axis(0.75, 1.0 / 64);
  hm::VelocityFieldSpec b = hm::builtin_field("constant", 2);
  hm::SpaceTimeFunction u0 = hm::builtin_scalar("gaussian(0.08, 0, 0.5)", 2);
  hm::SampledField u = hm::solve_characteristics(b, kOne, u0, grid, times);

  double budget(const hm::TestFunction& phi) const { return 10.0 * (h * h + h * h) * phi.c1_norm(); }
};

const FrontProblem& front() {
  static const FrontProblem problem;
  return problem;
}

Outcome classical_is_weak() {
  Outcome out;
  const auto& fp = front();
  for (const auto& phi : hm::front_test_functions(0.5, 1.0, 0.75)) {
    const auto r = hm::weak_residual(fp.u, fp.b, kOne, fp.u0, phi);
    out.require(std::abs(r.value) < fp.budget(phi), "%s %.2e/%.2e", phi.id().c_str(), std::abs(r.value),
                fp.budget(phi));
  }
  return out;
}

Outcome renormalization() {
  Outcome out;
  const auto& fp = front();
  for (const auto& theta : {hm::tanh_relabel(), hm::truncation_relabel(1.0, 0.05, 2.0)}) {
    const auto relabeled = hm::renormalize(fp.u, theta);
    const hm::SpaceTimeFunction h = [&](std::span<const double> x, double t) { return theta(kOne(x, t)); };
    const hm::SpaceTimeFunction u0 = [&](std::span<const double> x, double t) { return theta(fp.u0(x, t)); };
    double worst = 0.0;
    for (const auto& phi : hm::front_test_functions(0.5, 1.0, 0.75)) {
      const auto r = hm::weak_residual(relabeled, fp.b, h, u0, phi);
      worst = std::max(worst, std::abs(r.value) / (fp.budget(phi) * theta.derivative_bound()));
    }
    out.require(worst < 1.0, "%s max residual/budget %.3f", theta.name().c_str(), worst);
  }
  return out;
}

// 9 -------------------------------------------------------------------------

Outcome inverse_relabel() {
  Outcome out;
  const double bound = 2.0;
  const auto theta = hm::tanh_relabel();
  const auto inverse = hm::inverse_relabel(theta, bound);
  double err = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double s = -bound + 2.0 * bound * i / 4000.0;
    err = std::max(err, std::abs(inverse(theta(s)) - s));
  }
  out.require(err < 1e-10, "max round-trip error %.2e", err);
  bool exact = true;
  for (double sigma : {theta(bound) + 0.01, 1.0, 3.5, theta(-bound) - 0.2, -1.0}) {
    const double expect = sigma > 0.0 ? (1.0 / theta.derivative(bound)) * (sigma - theta(bound)) + bound
                                      : (1.0 / theta.derivative(-bound)) * (sigma - theta(-bound)) - bound;
    exact = exact && inverse(sigma) == expect;
  }
  out.require(exact, "linear branches %s", exact ? "exact" : "differ");
  return out;
}

// 10 ------------------------------------------------------------------------

Outcome gronwall() {
  Outcome out;
  const hm::StripGrid grid(2, 0.5, 1.0, 1.0 / 32);
  const auto times = hm::time_axis(0.5, 1.0 / 32);
  const auto bump = hm::builtin_scalar("gaussian(0.1, 0, 0.5)", 2);

  const auto rest = hm::builtin_field("constant(0, 0)", 2);
  const auto u_rest = hm::solve_characteristics(rest, kZero, bump, grid, times);
  const auto r1 = hm::gronwall_check(u_rest, rest, kZero, 2.0);
  out.require(r1.holds(1.05), "rest factor %.4f", r1.repair_factor());

  const auto inflow = hm::builtin_field("vertical_inflow", 2);
  const auto data = hm::mollify_data(inflow, hm::ScalarDataSpec{bump, kZero, 2.0, 0.5}, 1.0 / 16);
  const auto u_inflow = hm::solve_characteristics(inflow, data.boundary, data.initial, grid, times);
  const auto r2 = hm::gronwall_check(u_inflow, inflow, data.boundary, 2.0);
  bool nonincreasing = true;
  for (std::size_t n = 1; n < r2.rows.size(); ++n)
    nonincreasing = nonincreasing && r2.rows[n].energy <= r2.rows[n - 1].energy * (1.0 + hm::kSolverTolerance);
  out.require(r2.holds(1.05), "solenoidal inflow factor %.4f", r2.repair_factor());
  out.require(nonincreasing, "energy %s", nonincreasing ? "nonincreasing" : "grows");

  const auto up = hm::builtin_field("constant", 2);
  const auto u_front = hm::solve_characteristics(up, kOne, kZero, grid, times);
  const auto r3 = hm::gronwall_check(u_front, up, kOne, 2.0);
  out.require(r3.holds(1.05), "front factor %.4f", r3.repair_factor());
  return out;
}

// 11 ------------------------------------------------------------------------

Outcome uniqueness() {
  Outcome out;
  const hm::StripGrid grid(2, 1.0, 1.0, 1.0 / 32);
  const auto times = hm::time_axis(0.5, 1.0 / 32);
  hm::ScalarDataSpec data;
  data.initial = hm::builtin_scalar("gaussian(0.1, 0, 0.5)", 2);
  data.boundary = [](std::span<const double> x, double t) {
    const double s = std::sin(std::numbers::pi * t);
    return s * s * std::exp(-x[0] * x[0]);
  };
  data.p = 2.0;
  const std::vector<double> etas{0.2, 0.1, 0.05, 0.025};
  const auto report = hm::uniqueness_experiment(hm::builtin_field("constant", 2), data, etas, grid, times, {});
  const auto& d = report.differences;
  for (std::size_t k = 0; k + 1 < d.size(); ++k)
    out.require(d[k] >= 1.5 * d[k + 1], "%.3e/%.3e = %.2f", d[k], d[k + 1], d[k] / d[k + 1]);

  const std::vector<double> outflow_etas{0.1, 0.05};
  const auto drain = hm::uniqueness_experiment(hm::builtin_field("drain(1)", 2), data, outflow_etas, grid, times,
                                               kOne);
  out.require(drain.outflow_changed_nodes == 0, "outflow perturbation changed %zu nodes",
              drain.outflow_changed_nodes);
  return out;
}

// 12 ------------------------------------------------------------------------

double ring_integral(const std::function<double(const hm::Point2&)>& f, double inner, double outer) {
  auto row = [&](double y) {
    const double xo = std::sqrt(std::max(outer * outer - y * y, 0.0));
    auto along = [&](double x) { return f(hm::Point2{x, y}); };
    if (std::abs(y) >= inner) return gk(along, -xo, xo);
    const double xi = std::sqrt(inner * inner - y * y);
    return gk(along, -xo, -xi) + gk(along, xi, xo);
  };
  return gk(row, -outer, -inner) + gk(row, -inner, inner) + gk(row, inner, outer);
}

Outcome curved_boundary() {
  Outcome out;
  const auto disk = hm::SmoothDomain2D::disk(1.0);
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double width = 0.2;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double a = unit(rng);
    const double b = unit(rng);
    const double c = 1.5 * (unit(rng) + 1.0);
    const double d = unit(rng);
    auto f = [=](const hm::Point2& p) { return std::exp(a * p[0] + b * p[1]) * std::cos(c * p[0] * p[1] + d); };
    const double tubular = hm::band_integral(f, disk, width);
    const double cartesian = ring_integral(f, 1.0 - width, 1.0);
    worst = std::max(worst, std::abs(tubular - cartesian) / std::abs(cartesian));
  }
  out.require(worst <= 1e-6, "band integral max relative error %.2e", worst);

  const double h = 1.0 / 64;
  const double dt = 1.0 / 64;
  const double eta = 1.0 / 16;
  const auto grid = hm::StripGrid::box({hm::Axis::spanning(-1.125, 1.125, h), hm::Axis::spanning(-1.125, 1.125, h)});
  const auto times = hm::time_axis(0.5, dt);
  // Initial state equal to the inflow value near the circle, so no corner layer.
  const hm::SpaceTimeFunction u0 = [](std::span<const double> x, double) {
    const double r = std::hypot(x[0], x[1]);
    if (r >= 0.75) return 1.0;
    if (r <= 0.5) return 0.0;
    const double s = (r - 0.5) / 0.25;
    return s * s * (3.0 - 2.0 * s);
  };
  const auto b = hm::radial_inflow();
  const auto u = hm::solve_curved(b, disk, grid, times, kOne, u0);
  const auto trace = hm::curved_trace_residual(u, b, kOne, eta, disk, {8});
  const double budget = h * h + eta * dt + hm::kSolverTolerance;
  out.require(trace.l1_norm < budget, "radial trace L1 %.2e vs %.2e", trace.l1_norm, budget);

  const auto half = hm::SmoothDomain2D::half_plane();
  const hm::SpaceTimeFunction smooth = [](std::span<const double> x, double) {
    return std::sin(3.0 * x[0]) + x[1] * x[1] + std::exp(x[1]);
  };
  double flat = 0.0;
  for (const auto& x : {std::vector<double>{0.2, 0.0}, std::vector<double>{-0.4, 0.05}, std::vector<double>{0.7, 0.1}}) {
    const double tubular = hm::tubular_mollify(smooth, half, 0.1, x, 0.0, false, {16});
    const double direct = hm::convolve_half_space([&](std::span<const double> y) { return smooth(y, 0.0); }, 2, 0.1,
                                                  x, {16});
    flat = std::max(flat, std::abs(tubular - direct));
  }
  out.require(flat <= 1e-12, "flat reduction %.2e", flat);
  return out;
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected_failures;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--expect-fail") == 0 && i + 1 < argc) {
      expected_failures.insert(std::atoi(argv[++i]));
    } else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--expect-fail N]... [--only N]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "kernel normalization", kernel_normalization},
      {2, "boundary-defect contrast", boundary_defect},
      {3, "commutator oracle", commutator_oracle},
      {4, "commutator convergence", commutator_convergence},
      {5, "interchange identities", interchange},
      {6, "trace formulas", trace_formulas},
      {7, "classical solution is weak", classical_is_weak},
      {8, "renormalization", renormalization},
      {9, "inverse relabeling", inverse_relabel},
      {10, "gronwall bound", gronwall},
      {11, "uniqueness surrogate", uniqueness},
      {12, "curved boundary", curved_boundary},
  };

  int unexpected = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Stopwatch clock;
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const hm::Error& e) {
      outcome = {false, std::string("error: ") + e.what()};
    }
    const bool expected_fail = expected_failures.count(c.id) > 0;
    if (outcome.pass == expected_fail) ++unexpected;
    std::printf("[%s] %2d %-28s %s (%.1f s)%s\n", outcome.pass ? "PASS" : "FAIL", c.id, c.name,
                outcome.detail.c_str(), clock.seconds(),
                expected_fail ? (outcome.pass ? " UNEXPECTED PASS" : " (known failure)") : "");
    std::fflush(stdout);
  }
  std::printf("%d unexpected outcome(s)\n", unexpected);
  return unexpected == 0 ? 0 : 1;
}
