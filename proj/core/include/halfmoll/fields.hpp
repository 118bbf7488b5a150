#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "halfmoll/grid.hpp"

namespace halfmoll {

// b(x) = matrix * x + offset, autonomous; matrix is row-major d x d.
struct AffineForm {
  std::vector<double> matrix;
  std::vector<double> offset;
};

class VelocityFieldSpec {
 public:
  using Evaluator = std::function<void(std::span<const double> x, double t, std::span<double> out)>;
  using ScalarEvaluator = std::function<double(std::span<const double> x, double t)>;

  struct Metadata {
    std::string name;
    std::string regularity;
    bool autonomous = true;
  };

  // `gradient` writes out[i * d + j] = d b_i / d x_j.
  VelocityFieldSpec(int dimension, Evaluator value, Evaluator gradient, ScalarEvaluator divergence,
                    bool solenoidal, std::optional<double> sup_bound, Metadata metadata,
                    std::optional<AffineForm> affine = std::nullopt);

  static VelocityFieldSpec from_affine(AffineForm form, Metadata metadata, std::optional<double> sup_bound);

  int dimension() const noexcept { return dimension_; }
  void value(std::span<const double> x, double t, std::span<double> out) const { value_(x, t, out); }
  std::vector<double> value(std::span<const double> x, double t) const;
  void gradient(std::span<const double> x, double t, std::span<double> out) const { gradient_(x, t, out); }
  std::vector<double> gradient(std::span<const double> x, double t) const;
  double divergence(std::span<const double> x, double t) const { return divergence_(x, t); }

  bool solenoidal() const noexcept { return solenoidal_; }
  const std::optional<double>& sup_bound() const noexcept { return sup_bound_; }
  const Metadata& metadata() const noexcept { return metadata_; }
  const std::string& name() const noexcept { return metadata_.name; }
  const std::optional<AffineForm>& affine() const noexcept { return affine_; }

 private:
  int dimension_;
  Evaluator value_;
  Evaluator gradient_;
  ScalarEvaluator divergence_;
  bool solenoidal_;
  std::optional<double> sup_bound_;
  Metadata metadata_;
  std::optional<AffineForm> affine_;
};

// Parses "name" or "name(a, b, ...)". Known names: constant(v...),
// vertical_inflow, rigid_rotation, shear, rough_power(gamma, x0...),
// compressive(lambda), pulsed_rotation, drain(L).
VelocityFieldSpec builtin_field(std::string_view spec, int dimension);
std::vector<std::string> builtin_field_names();

// Initial data u0(x) (time argument ignored), boundary data h(x', t) on the
// tangential coordinates of the flat boundary (or the Cartesian boundary
// point for curved domains), exponent p and a radius containing supp u0.
struct ScalarDataSpec {
  SpaceTimeFunction initial;
  SpaceTimeFunction boundary;
  double p = 2.0;
  double support_radius = 0.0;
};

// Scalar profiles by name: zero, one, constant(c), gaussian(sigma, c...),
// ramp (the coordinate x_d), time (t), pulse (sin^2(pi t) exp(-|x|^2)) and
// radial_step(r0, r1) (0 inside r0, 1 outside r1, cubic smoothstep between).
SpaceTimeFunction builtin_scalar(std::string_view spec, int dimension);

// L^beta over the grid of the Frobenius norm of grad b at time t.
double sobolev_seminorm(const VelocityFieldSpec& b, double beta, const StripGrid& grid, double t = 0.0);

// b(x', 0, t) . nu with nu = -e_d, i.e. -b_d.
double normal_trace(const VelocityFieldSpec& b, std::span<const double> tangential, double t);

// alpha with 1/alpha = 1/beta + 1/p; requires beta >= p' (conjugate of p).
double exponent_check(double p, double beta);

}  // namespace halfmoll
