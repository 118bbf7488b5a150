#include "halfmoll/relabel.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <vector>

#include "halfmoll/error.hpp"
#include "halfmoll/kernels.hpp"

namespace halfmoll {

RelabelFunction::RelabelFunction(RelabelKind kind, Scalar value, Scalar derivative, double derivative_bound,
                                 std::string name)
    : kind_(kind),
      value_(std::move(value)),
      derivative_(std::move(derivative)),
      derivative_bound_(derivative_bound),
      name_(std::move(name)) {
  require(static_cast<bool>(value_) && static_cast<bool>(derivative_), ErrorKind::invalid_parameter,
          "relabeling needs a value and a derivative");
  require(std::isfinite(derivative_bound_) && derivative_bound_ >= 0.0, ErrorKind::invalid_parameter,
          "relabeling derivative must be bounded");
}

RelabelFunction RelabelFunction::smooth(Scalar value, Scalar derivative, double derivative_bound, std::string name) {
  return {RelabelKind::smooth_given, std::move(value), std::move(derivative), derivative_bound, std::move(name)};
}

RelabelFunction identity_relabel() {
  return RelabelFunction::smooth([](double s) { return s; }, [](double) { return 1.0; }, 1.0, "identity");
}

RelabelFunction tanh_relabel() {
  return RelabelFunction::smooth([](double s) { return std::tanh(s); },
                                 [](double s) {
                                   const double c = std::cosh(s);
                                   return 1.0 / (c * c);
                                 },
                                 1.0, "tanh");
}

namespace {

// Integral of f(y) rho_eta(sigma - y) over y, split at the kinks of f. The
// integrand is smooth on each piece, so a shallow 61-point rule suffices.
template <typename F>
double smooth_against_kernel(F f, double sigma, double eta, std::vector<double> kinks) {
  using boost::math::quadrature::gauss_kronrod;
  std::vector<double> cuts{sigma - eta};
  std::sort(kinks.begin(), kinks.end());
  for (double k : kinks)
    if (k > sigma - eta && k < sigma + eta) cuts.push_back(k);
  cuts.push_back(sigma + eta);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += gauss_kronrod<double, 61>::integrate(
        [&](double y) { return f(y) * eval_symmetric(sigma - y, eta); }, cuts[i], cuts[i + 1], 3, 1e-14);
  }
  return total;
}

}  // namespace

RelabelFunction truncation_relabel(double cap, double eta_r, double p) {
  require(cap > 0.0 && eta_r > 0.0 && p >= 1.0 && std::isfinite(p), ErrorKind::invalid_parameter,
          "truncation relabeling needs M > 0, eta_r > 0 and finite p >= 1");
  auto g = [cap, p](double y) { return std::pow(std::min(std::abs(y), cap), p); };
  auto g_slope = [cap, p](double y) {
    const double a = std::abs(y);
    if (a >= cap || a == 0.0) return 0.0;
    return std::copysign(p * std::pow(a, p - 1.0), y);
  };
  const std::vector<double> kinks{-cap, 0.0, cap};
  const double shift = smooth_against_kernel(g, 0.0, eta_r, kinks);
  const double plateau = std::pow(cap, p) - shift;
  auto value = [=](double s) {
    if (std::abs(s) >= cap + eta_r) return plateau;
    return smooth_against_kernel(g, s, eta_r, kinks) - shift;
  };
  auto derivative = [=](double s) {
    if (std::abs(s) >= cap + eta_r) return 0.0;
    return smooth_against_kernel(g_slope, s, eta_r, kinks);
  };
  char name[96];
  std::snprintf(name, sizeof name, "truncation(M=%g, eta=%g, p=%g)", cap, eta_r, p);
  return {RelabelKind::truncation, value, derivative, p * std::pow(cap, p - 1.0), name};
}

RelabelFunction inverse_relabel(const RelabelFunction& theta, double bound) {
  require(bound > 0.0 && std::isfinite(bound), ErrorKind::invalid_parameter, "inverse relabeling needs C > 0");
  require(std::abs(theta(0.0)) <= 1e-14, ErrorKind::invalid_parameter, "theta(0) must vanish");
  constexpr int kSamples = 1001;
  double min_slope = std::numeric_limits<double>::infinity();
  double previous = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kSamples; ++i) {
    const double s = -bound + 2.0 * bound * i / (kSamples - 1);
    const double v = theta(s);
    const double slope = theta.derivative(s);
    require(slope > 0.0 && v > previous, ErrorKind::invalid_parameter,
            "theta is not strictly increasing on [-C, C]");
    min_slope = std::min(min_slope, slope);
    previous = v;
  }
  const double lo_value = theta(-bound);
  const double hi_value = theta(bound);
  const double lo_slope = theta.derivative(-bound);
  const double hi_slope = theta.derivative(bound);
  auto invert = [theta, bound, lo_value, hi_value](double sigma) {
    if (sigma == lo_value) return -bound;
    if (sigma == hi_value) return bound;
    std::uintmax_t iterations = 200;
    const auto [a, b] = boost::math::tools::toms748_solve([&](double s) { return theta(s) - sigma; }, -bound, bound,
                                                          lo_value - sigma, hi_value - sigma,
                                                          boost::math::tools::eps_tolerance<double>(52), iterations);
    return 0.5 * (a + b);
  };
  auto value = [=](double sigma) {
    if (sigma > hi_value) return (1.0 / hi_slope) * (sigma - hi_value) + bound;
    if (sigma < lo_value) return (1.0 / lo_slope) * (sigma - lo_value) - bound;
    return invert(sigma);
  };
  auto derivative = [=](double sigma) {
    if (sigma > hi_value) return 1.0 / hi_slope;
    if (sigma < lo_value) return 1.0 / lo_slope;
    return 1.0 / theta.derivative(invert(sigma));
  };
  return {RelabelKind::inverse, value, derivative, 1.0 / min_slope, "inverse(" + theta.name() + ")"};
}

}  // namespace halfmoll
