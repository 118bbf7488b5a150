#include "halfmoll/kernels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <string>

#include "halfmoll/error.hpp"

namespace halfmoll {
namespace {

using boost::math::quadrature::gauss_kronrod;

double symmetric_shape(double x) {
  if (!(x > -1.0 && x < 1.0)) return 0.0;
  return std::exp(-1.0 / ((1.0 - x) * (1.0 + x)));
}

double one_sided_shape(double x) {
  if (!(x > 0.0 && x < 1.0)) return 0.0;
  // 4 (x - 1/2)^2 - 1 in factored form; the expanded one rounds to 0 near x = 0.
  return std::exp(1.0 / (4.0 * x * (x - 1.0)));
}

double adaptive(auto&& f, double a, double b) {
  return gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

double unit_symmetric(double x) { return symmetric_normalization() * symmetric_shape(x); }
double unit_one_sided(double x) { return one_sided_normalization() * one_sided_shape(x); }

double unit_symmetric_derivative(double x) {
  const double value = unit_symmetric(x);
  if (value == 0.0) return 0.0;
  const double q = (1.0 - x) * (1.0 + x);
  return value * (-2.0 * x / (q * q));
}

double unit_one_sided_derivative(double x) {
  const double value = unit_one_sided(x);
  if (value == 0.0) return 0.0;
  const double c = x - 0.5;
  const double q = 4.0 * x * (x - 1.0);
  return value * (-8.0 * c / (q * q));
}

void check_eta(double eta) {
  if (!(eta > 0.0 && std::isfinite(eta))) fail(ErrorKind::invalid_parameter, "kernel scale eta must be positive, got " + std::to_string(eta));
}

void check_dimension(std::size_t size, int dimension) {
  require(dimension >= 1, ErrorKind::invalid_parameter, "dimension must be at least 1");
  if (!(size == static_cast<std::size_t>(dimension))) fail(ErrorKind::dimension, "point has " + std::to_string(size) + " coordinates, expected " + std::to_string(dimension));
}

}  // namespace

double symmetric_normalization() {
  static const double constant = 1.0 / adaptive(symmetric_shape, -1.0, 1.0);
  return constant;
}

double one_sided_normalization() {
  static const double constant = 1.0 / adaptive(one_sided_shape, 0.0, 1.0);
  return constant;
}

double eval_symmetric(double x, double eta) {
  check_eta(eta);
  return (1.0 / eta) * unit_symmetric(x / eta);
}

double eval_one_sided(double x, double eta) {
  check_eta(eta);
  return (1.0 / eta) * unit_one_sided(x / eta);
}

double symmetric_derivative(double x, double eta) {
  check_eta(eta);
  return (1.0 / (eta * eta)) * unit_symmetric_derivative(x / eta);
}

double one_sided_derivative(double x, double eta) {
  check_eta(eta);
  return (1.0 / (eta * eta)) * unit_one_sided_derivative(x / eta);
}

double eval_half_space_kernel(std::span<const double> x, double eta, int dimension) {
  check_eta(eta);
  check_dimension(x.size(), dimension);
  double value = eval_one_sided(-x.back(), eta);
  for (std::size_t i = 0; i + 1 < x.size() && value != 0.0; ++i) value *= eval_symmetric(x[i], eta);
  return value;
}

std::vector<double> kernel_gradient(std::span<const double> x, double eta, int dimension) {
  check_eta(eta);
  check_dimension(x.size(), dimension);
  const std::size_t d = x.size();
  std::vector<double> factor(d), slope(d);
  for (std::size_t i = 0; i + 1 < d; ++i) {
    factor[i] = eval_symmetric(x[i], eta);
    slope[i] = symmetric_derivative(x[i], eta);
  }
  factor[d - 1] = eval_one_sided(-x[d - 1], eta);
  slope[d - 1] = -one_sided_derivative(-x[d - 1], eta);
  std::vector<double> gradient(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    double g = slope[i];
    for (std::size_t j = 0; j < d; ++j)
      if (j != i) g *= factor[j];
    gradient[i] = g;
  }
  return gradient;
}

double eval_boundary_time_kernel(std::span<const double> tangential, double t, double eta) {
  check_eta(eta);
  double value = eval_one_sided(-t, eta);
  for (double xi : tangential) value *= eval_symmetric(xi, eta);
  return value;
}

double moment(int k) {
  require(k >= 0, ErrorKind::invalid_parameter, "moment order must be nonnegative");
  if (k == 0) return adaptive(unit_one_sided, 0.0, 1.0);
  return adaptive([k](double z) { return std::pow(z, k) * unit_one_sided(z); }, 0.0, 1.0);
}

Kernel1D::Kernel1D(KernelKind kind, double eta) : kind_(kind), eta_(eta) { check_eta(eta); }

double Kernel1D::normalization() const {
  return kind_ == KernelKind::symmetric ? symmetric_normalization() : one_sided_normalization();
}

std::pair<double, double> Kernel1D::support() const noexcept {
  return kind_ == KernelKind::symmetric ? std::pair{-eta_, eta_} : std::pair{0.0, eta_};
}

double Kernel1D::operator()(double x) const {
  return kind_ == KernelKind::symmetric ? eval_symmetric(x, eta_) : eval_one_sided(x, eta_);
}

double Kernel1D::derivative(double x) const {
  return kind_ == KernelKind::symmetric ? symmetric_derivative(x, eta_)
                                        : one_sided_derivative(x, eta_);
}

HalfSpaceKernel::HalfSpaceKernel(int dimension, double eta) : dimension_(dimension), eta_(eta) {
  require(dimension >= 1, ErrorKind::invalid_parameter, "dimension must be at least 1");
  check_eta(eta);
}

double HalfSpaceKernel::operator()(std::span<const double> x) const {
  return eval_half_space_kernel(x, eta_, dimension_);
}

std::vector<double> HalfSpaceKernel::gradient(std::span<const double> x) const {
  return kernel_gradient(x, eta_, dimension_);
}

}  // namespace halfmoll
