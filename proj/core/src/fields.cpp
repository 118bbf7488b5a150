#include "halfmoll/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "halfmoll/error.hpp"
#include "halfmoll/parallel.hpp"

namespace halfmoll {
namespace {

struct ParsedSpec {
  std::string name;
  std::vector<double> args;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

ParsedSpec parse_spec(std::string_view spec) {
  ParsedSpec parsed;
  const auto open = spec.find('(');
  if (open == std::string_view::npos) {
    parsed.name = trim(spec);
    return parsed;
  }
  const auto close = spec.rfind(')');
  if (!(close != std::string_view::npos && close > open)) fail(ErrorKind::lookup, "malformed spec '" + std::string(spec) + "'");
  parsed.name = trim(spec.substr(0, open));
  std::stringstream args{std::string(spec.substr(open + 1, close - open - 1))};
  std::string item;
  while (std::getline(args, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) continue;
    try {
      parsed.args.push_back(std::stod(t));
    } catch (const std::exception&) {
      fail(ErrorKind::lookup, "non-numeric argument '" + t + "' in '" + std::string(spec) + "'");
    }
  }
  return parsed;
}

void expect_args(const ParsedSpec& s, std::size_t lo, std::size_t hi) {
  if (!(s.args.size() >= lo && s.args.size() <= hi)) fail(ErrorKind::lookup, s.name + " expects between " + std::to_string(lo) + " and " + std::to_string(hi) + " arguments");
}

VelocityFieldSpec constant_field(std::vector<double> v) {
  const int d = static_cast<int>(v.size());
  double norm = 0.0;
  for (double c : v) norm += c * c;
  AffineForm form{std::vector<double>(static_cast<std::size_t>(d * d), 0.0), v};
  return VelocityFieldSpec::from_affine(std::move(form), {"constant", "smooth", true}, std::sqrt(norm));
}

VelocityFieldSpec rough_power(int d, double gamma, std::vector<double> center, std::vector<double> direction) {
  require(gamma > 0.0 && gamma < 1.0, ErrorKind::invalid_parameter, "rough_power needs gamma in (0, 1)");
  auto radius = [center](std::span<const double> x) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - center[i]) * (x[i] - center[i]);
    return std::sqrt(r2);
  };
  auto value = [=](std::span<const double> x, double, std::span<double> out) {
    const double s = std::pow(radius(x), gamma);
    for (int i = 0; i < d; ++i) out[i] = s * direction[i];
  };
  // grad of |x - x0|^gamma is gamma |x - x0|^(gamma - 2) (x - x0); set to 0 at x0 itself.
  auto gradient = [=](std::span<const double> x, double, std::span<double> out) {
    const double r = radius(x);
    const double c = r > 0.0 ? gamma * std::pow(r, gamma - 2.0) : 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out[i * d + j] = direction[i] * c * (x[j] - center[j]);
  };
  auto divergence = [=](std::span<const double> x, double) {
    const double r = radius(x);
    if (r == 0.0) return 0.0;
    double dot = 0.0;
    for (int i = 0; i < d; ++i) dot += (x[i] - center[i]) * direction[i];
    return gamma * std::pow(r, gamma - 2.0) * dot;
  };
  return VelocityFieldSpec(d, value, gradient, divergence, false, std::nullopt,
                           {"rough_power", "W^{1,q} for (1-gamma) q < d, not Lipschitz", true});
}

}  // namespace

VelocityFieldSpec::VelocityFieldSpec(int dimension, Evaluator value, Evaluator gradient, ScalarEvaluator divergence,
                                     bool solenoidal, std::optional<double> sup_bound, Metadata metadata,
                                     std::optional<AffineForm> affine)
    : dimension_(dimension),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      divergence_(std::move(divergence)),
      solenoidal_(solenoidal),
      sup_bound_(sup_bound),
      metadata_(std::move(metadata)),
      affine_(std::move(affine)) {
  require(dimension_ >= 1, ErrorKind::invalid_parameter, "field dimension must be at least 1");
}

VelocityFieldSpec VelocityFieldSpec::from_affine(AffineForm form, Metadata metadata, std::optional<double> sup_bound) {
  const int d = static_cast<int>(form.offset.size());
  require(form.matrix.size() == static_cast<std::size_t>(d * d), ErrorKind::dimension, "affine matrix size");
  double trace = 0.0;
  for (int i = 0; i < d; ++i) trace += form.matrix[static_cast<std::size_t>(i * d + i)];
  auto value = [form, d](std::span<const double> x, double, std::span<double> out) {
    for (int i = 0; i < d; ++i) {
      double v = form.offset[static_cast<std::size_t>(i)];
      for (int j = 0; j < d; ++j) v += form.matrix[static_cast<std::size_t>(i * d + j)] * x[static_cast<std::size_t>(j)];
      out[static_cast<std::size_t>(i)] = v;
    }
  };
  auto gradient = [form](std::span<const double>, double, std::span<double> out) {
    std::copy(form.matrix.begin(), form.matrix.end(), out.begin());
  };
  auto divergence = [trace](std::span<const double>, double) { return trace; };
  return VelocityFieldSpec(d, value, gradient, divergence, trace == 0.0, sup_bound, std::move(metadata), form);
}

std::vector<double> VelocityFieldSpec::value(std::span<const double> x, double t) const {
  std::vector<double> out(static_cast<std::size_t>(dimension_));
  value_(x, t, out);
  return out;
}

std::vector<double> VelocityFieldSpec::gradient(std::span<const double> x, double t) const {
  std::vector<double> out(static_cast<std::size_t>(dimension_ * dimension_));
  gradient_(x, t, out);
  return out;
}

std::vector<std::string> builtin_field_names() {
  return {"constant", "vertical_inflow", "rigid_rotation", "shear", "rough_power", "compressive",
          "pulsed_rotation", "drain"};
}

VelocityFieldSpec builtin_field(std::string_view spec, int d) {
  require(d >= 1, ErrorKind::invalid_parameter, "dimension must be at least 1");
  const ParsedSpec s = parse_spec(spec);
  const auto n = static_cast<std::size_t>(d);
  auto need_plane = [&] {
    if (!(d == 2)) fail(ErrorKind::invalid_parameter, s.name + " is defined for d = 2 only");
  };

  if (s.name == "constant") {
    if (s.args.empty()) {
      std::vector<double> v(n, 0.0);
      v.back() = 1.0;
      return constant_field(v);
    }
    require(s.args.size() == n, ErrorKind::lookup, "constant needs one component per dimension");
    return constant_field(s.args);
  }
  if (s.name == "vertical_inflow") {
    expect_args(s, 0, 0);
    // b = (1 + sin(pi x_0)/2) e_d: inflow everywhere on x_d = 0, divergence-free.
    auto value = [n](std::span<const double> x, double, std::span<double> out) {
      std::fill(out.begin(), out.end(), 0.0);
      out[n - 1] = n > 1 ? 1.0 + 0.5 * std::sin(std::numbers::pi * x[0]) : 1.0;
    };
    auto gradient = [n](std::span<const double> x, double, std::span<double> out) {
      std::fill(out.begin(), out.end(), 0.0);
      if (n > 1) out[(n - 1) * n] = 0.5 * std::numbers::pi * std::cos(std::numbers::pi * x[0]);
    };
    return VelocityFieldSpec(d, value, gradient, [](std::span<const double>, double) { return 0.0; }, true, 1.5,
                             {"vertical_inflow", "smooth", true});
  }
  if (s.name == "rigid_rotation") {
    need_plane();
    expect_args(s, 0, 0);
    return VelocityFieldSpec::from_affine({{0.0, -1.0, 1.0, 0.0}, {0.0, 0.0}}, {"rigid_rotation", "smooth", true},
                                          std::nullopt);
  }
  if (s.name == "shear") {
    need_plane();
    expect_args(s, 0, 0);
    return VelocityFieldSpec::from_affine({{0.0, 1.0, 0.0, 0.0}, {0.0, 0.0}}, {"shear", "smooth", true},
                                          std::nullopt);
  }
  if (s.name == "compressive") {
    expect_args(s, 0, 1);
    const double lambda = s.args.empty() ? 1.0 : s.args[0];
    AffineForm form{std::vector<double>(n * n, 0.0), std::vector<double>(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) form.matrix[i * n + i] = lambda / d;
    return VelocityFieldSpec::from_affine(std::move(form), {"compressive", "smooth", true}, std::nullopt);
  }
  if (s.name == "drain") {
    expect_args(s, 0, 1);
    const double depth = s.args.empty() ? 1.0 : s.args[0];
    require(depth > 0.0, ErrorKind::invalid_parameter, "drain depth must be positive");
    // b = -(1 - x_d / L) e_d: pure outflow at x_d = 0, stagnant at x_d = L.
    AffineForm form{std::vector<double>(n * n, 0.0), std::vector<double>(n, 0.0)};
    form.matrix[n * n - 1] = 1.0 / depth;
    form.offset[n - 1] = -1.0;
    return VelocityFieldSpec::from_affine(std::move(form), {"drain", "smooth", true}, std::nullopt);
  }
  if (s.name == "pulsed_rotation") {
    need_plane();
    expect_args(s, 0, 1);
    const double frequency = s.args.empty() ? 1.0 : s.args[0];
    auto factor = [frequency](double t) { return 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * frequency * t); };
    auto value = [factor](std::span<const double> x, double t, std::span<double> out) {
      out[0] = -factor(t) * x[1];
      out[1] = factor(t) * x[0];
    };
    auto gradient = [factor](std::span<const double>, double t, std::span<double> out) {
      out[0] = 0.0;
      out[1] = -factor(t);
      out[2] = factor(t);
      out[3] = 0.0;
    };
    return VelocityFieldSpec(d, value, gradient, [](std::span<const double>, double) { return 0.0; }, true,
                             std::nullopt, {"pulsed_rotation", "smooth", false});
  }
  if (s.name == "rough_power") {
    require(!s.args.empty(), ErrorKind::lookup, "rough_power needs gamma");
    require(s.args.size() == 1 || s.args.size() == 1 + n || s.args.size() == 1 + 2 * n, ErrorKind::lookup,
            "rough_power(gamma[, x0...][, e...])");
    // Default centre sits at a 1/3 offset of the 1/64 lattice, hence off every dyadic refinement of it.
    std::vector<double> center(n, 1.0 / 192.0);
    center.back() += 0.5;
    std::vector<double> direction(n, 0.0);
    direction.front() = 1.0;
    if (s.args.size() > 1) center.assign(s.args.begin() + 1, s.args.begin() + 1 + static_cast<long>(n));
    if (s.args.size() > 1 + n) {
      direction.assign(s.args.begin() + 1 + static_cast<long>(n), s.args.end());
      double norm = 0.0;
      for (double c : direction) norm += c * c;
      require(norm > 0.0, ErrorKind::invalid_parameter, "rough_power direction must be nonzero");
      for (double& c : direction) c /= std::sqrt(norm);
    }
    return rough_power(d, s.args[0], center, direction);
  }
  fail(ErrorKind::lookup, "unknown field '" + std::string(spec) + "'");
}

SpaceTimeFunction builtin_scalar(std::string_view spec, int dimension) {
  const ParsedSpec s = parse_spec(spec);
  const auto n = static_cast<std::size_t>(dimension);
  if (s.name == "zero") return [](std::span<const double>, double) { return 0.0; };
  if (s.name == "one") return [](std::span<const double>, double) { return 1.0; };
  if (s.name == "constant") {
    expect_args(s, 1, 1);
    const double c = s.args[0];
    return [c](std::span<const double>, double) { return c; };
  }
  if (s.name == "ramp") return [](std::span<const double> x, double) { return x.empty() ? 0.0 : x.back(); };
  if (s.name == "time") return [](std::span<const double>, double t) { return t; };
  if (s.name == "gaussian") {
    require(s.args.size() == 1 || s.args.size() == 1 + n, ErrorKind::lookup, "gaussian(sigma[, centre...])");
    const double sigma = s.args[0];
    require(sigma > 0.0, ErrorKind::invalid_parameter, "gaussian width must be positive");
    std::vector<double> center(n, 0.0);
    if (s.args.size() > 1) center.assign(s.args.begin() + 1, s.args.end());
    return [sigma, center](std::span<const double> x, double) {
      double r2 = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - center[i]) * (x[i] - center[i]);
      return std::exp(-r2 / (2.0 * sigma * sigma));
    };
  }
  if (s.name == "pulse") {
    return [](std::span<const double> x, double t) {
      double r2 = 0.0;
      for (double c : x) r2 += c * c;
      const double w = std::sin(std::numbers::pi * t);
      return w * w * std::exp(-r2);
    };
  }
  if (s.name == "radial_step") {
    expect_args(s, 2, 2);
    const double r0 = s.args[0];
    const double r1 = s.args[1];
    require(0.0 <= r0 && r0 < r1, ErrorKind::invalid_parameter, "radial_step needs 0 <= r0 < r1");
    return [r0, r1](std::span<const double> x, double) {
      double r2 = 0.0;
      for (double c : x) r2 += c * c;
      const double z = std::clamp((std::sqrt(r2) - r0) / (r1 - r0), 0.0, 1.0);
      return z * z * (3.0 - 2.0 * z);
    };
  }
  fail(ErrorKind::lookup, "unknown scalar profile '" + std::string(spec) + "'");
}

double sobolev_seminorm(const VelocityFieldSpec& b, double beta, const StripGrid& grid, double t) {
  require(beta >= 1.0, ErrorKind::invalid_parameter, "seminorm exponent must be >= 1");
  require(b.dimension() == grid.dimension(), ErrorKind::dimension, "field and grid dimensions differ");
  const std::size_t dd = static_cast<std::size_t>(b.dimension() * b.dimension());
  const SampledField norm = SampledField::sample(grid, std::nullopt, [&](std::span<const double> x, double) {
    std::vector<double> g(dd);
    b.gradient(x, t, g);
    double s = 0.0;
    for (double v : g) s += v * v;
    return std::sqrt(s);
  });
  return lp_norm(norm, beta);
}

double normal_trace(const VelocityFieldSpec& b, std::span<const double> tangential, double t) {
  require(tangential.size() + 1 == static_cast<std::size_t>(b.dimension()), ErrorKind::dimension,
          "boundary point has wrong dimension");
  std::vector<double> x(tangential.begin(), tangential.end());
  x.push_back(0.0);
  return -b.value(x, t).back();
}

double exponent_check(double p, double beta) {
  require(p >= 1.0, ErrorKind::invalid_parameter, "p must be >= 1");
  require(beta >= 1.0, ErrorKind::invalid_parameter, "beta must be >= 1");
  const double conjugate = p == 1.0 ? std::numeric_limits<double>::infinity() : p / (p - 1.0);
  if (!(beta >= conjugate * (1.0 - 1e-14))) fail(ErrorKind::hypothesis_violation, "beta = " + std::to_string(beta) + " is below the conjugate exponent p' = " + std::to_string(conjugate));
  const double alpha = 1.0 / (1.0 / beta + 1.0 / p);
  require(alpha >= 1.0 - 1e-14, ErrorKind::hypothesis_violation, "alpha < 1");
  return alpha;
}

}  // namespace halfmoll
