#pragma once

#include <span>
#include <utility>
#include <vector>

namespace halfmoll {

// Symmetric bump: rho(x) = C_s exp(-1/(1-x^2)) on (-1, 1).
// One-sided bump: omega(x) = C exp(1/(4(x-1/2)^2 - 1)) on (0, 1).
// Scaled kernels are (1/eta) k(x/eta); all evaluators return exactly 0.0
// outside the closed support.

double symmetric_normalization();  // C_s
double one_sided_normalization();  // C

double eval_symmetric(double x, double eta);
double eval_one_sided(double x, double eta);
double symmetric_derivative(double x, double eta);
double one_sided_derivative(double x, double eta);

// Product kernel on R^d: prod_{i<d-1} rho_eta(x_i) * omega_eta(-x_{d-1}).
// The normal factor is supported on x_{d-1} in [-eta, 0].
double eval_half_space_kernel(std::span<const double> x, double eta, int dimension);
std::vector<double> kernel_gradient(std::span<const double> x, double eta, int dimension);

// Boundary-time kernel: prod_i rho_eta(tangential_i) * omega_eta(-t).
double eval_boundary_time_kernel(std::span<const double> tangential, double t, double eta);

// Integral of z^k omega(z) over (0, 1).
double moment(int k);

enum class KernelKind { symmetric, one_sided };

class Kernel1D {
 public:
  Kernel1D(KernelKind kind, double eta);

  KernelKind kind() const noexcept { return kind_; }
  double eta() const noexcept { return eta_; }
  double normalization() const;
  std::pair<double, double> support() const noexcept;
  double operator()(double x) const;
  double derivative(double x) const;

 private:
  KernelKind kind_;
  double eta_;
};

class HalfSpaceKernel {
 public:
  HalfSpaceKernel(int dimension, double eta);

  int dimension() const noexcept { return dimension_; }
  double eta() const noexcept { return eta_; }
  Kernel1D tangential() const { return {KernelKind::symmetric, eta_}; }
  Kernel1D normal() const { return {KernelKind::one_sided, eta_}; }
  double operator()(std::span<const double> x) const;
  std::vector<double> gradient(std::span<const double> x) const;

 private:
  int dimension_;
  double eta_;
};

}  // namespace halfmoll
