#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "halfmoll/fields.hpp"
#include "halfmoll/grid.hpp"
#include "halfmoll/stencil.hpp"

namespace halfmoll {

using GradientFunction = std::function<void(std::span<const double> x, double t, std::span<double> out)>;

// Pointwise quadrature resolution used by the evaluators below.
struct MollifyOptions {
  int points_per_width = 16;
};

// u_eta(x, t) = int int u(y, s) rho_hat(x - y) omega_eta(s - t) dy ds.
// `values` holds u_eta on every node where the kernel support fits inside
// the source grid: |x_i| <= A - eta, x_d + eta <= L, t + eta <= T.
class ApproximateSolution {
 public:
  ApproximateSolution(SampledField source, double eta, SampledField values);

  double eta() const noexcept { return eta_; }
  const SampledField& source() const noexcept { return source_; }
  const SampledField& values() const noexcept { return values_; }

  double evaluate(std::span<const double> x, double t, MollifyOptions options = {}) const;
  // Derivatives taken through the kernel.
  double time_derivative(std::span<const double> x, double t, MollifyOptions options = {}) const;
  std::vector<double> gradient(std::span<const double> x, double t, MollifyOptions options = {}) const;

 private:
  double quadrature(std::span<const double> x, double t, int derivative_axis, MollifyOptions options) const;

  SampledField source_;
  double eta_;
  SampledField values_;
};

ApproximateSolution mollify_solution(const SampledField& u, double eta);

struct MollifiedData {
  VelocityFieldSpec velocity;
  SpaceTimeFunction boundary;
  SpaceTimeFunction initial;
  double eta;
};

// b_eta = time-forward, half-space mollification of b; h_eta = h * rho_tilde;
// u0_eta = u0 * rho_hat. Affine autonomous fields are mollified in closed
// form (b(x + eta m1 e_d)). With a horizon, evaluating h_eta or b_eta past
// T - eta is an out-of-horizon error.
MollifiedData mollify_data(const VelocityFieldSpec& b, const ScalarDataSpec& data, double eta,
                           std::optional<double> horizon = std::nullopt, MollifyOptions options = {});

enum class CommutatorMethod { distributional, smooth_direct };

struct CommutatorSample {
  std::vector<double> point;
  double time = 0.0;
  double value = 0.0;
  CommutatorMethod method = CommutatorMethod::distributional;
};

// r_eta(u, b)(x) = -int u(y) div_y(b(y) rho_hat(x - y)) dy - b(x) . grad(u * rho_hat)(x),
// with y_d > 0 throughout.
CommutatorSample commutator(const SpaceTimeFunction& u, const VelocityFieldSpec& b, double eta,
                            std::span<const double> x, double s, MollifyOptions options = {});
CommutatorSample commutator(const SampledField& u, const VelocityFieldSpec& b, double eta,
                            std::span<const double> x, double s, MollifyOptions options = {});
// (b . grad u) * rho_hat - b . grad(u * rho_hat) with the analytic gradient of u.
CommutatorSample commutator_direct(const SpaceTimeFunction& u, const GradientFunction& grad_u,
                                   const VelocityFieldSpec& b, double eta, std::span<const double> x, double s,
                                   MollifyOptions options = {});

enum class KernelOrientation { forward, reflected };

// The commutator on every admissible grid node (grid-aligned quadrature, with
// a factor-4 refined lattice when eta < 8h). The reflected orientation uses
// rho_hat(-z), the adjoint of the one-sided convolution.
SampledField commutator_field(const SpaceTimeFunction& u, const VelocityFieldSpec& b, double eta,
                              const StripGrid& grid, double s = 0.0,
                              KernelOrientation orientation = KernelOrientation::forward);

struct ConvergenceRow {
  double eta = 0.0;
  double norm = 0.0;
  double bound_ratio = 0.0;
  double wallclock_s = 0.0;
};

struct ConvergenceReport {
  std::string field_name;
  double p = 0.0;
  double beta = 0.0;
  double alpha = 0.0;
  double spacing = 0.0;
  std::vector<ConvergenceRow> rows;

  bool norm_decreasing() const;
  double decay_ratio() const;                 // last norm / first norm
  double ratio_growth() const;                 // max over rows of bound_ratio / first bound_ratio
  std::string csv() const;                    // eta,norm,bound_ratio,wallclock_s
  std::string metadata_json() const;
};

ConvergenceReport commutator_convergence(const SpaceTimeFunction& u, const VelocityFieldSpec& b, double p,
                                         double beta, std::span<const double> eta_list, const StripGrid& grid);

struct InterchangeResult {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;

  double relative() const;  // residual / (|lhs| + |rhs| + 1)
};

// Solenoidal b: lhs = int r_eta(u, b) v, rhs = int r_eta^reflected(v, b) u.
// The one-sided kernel is not even, so the pairing swaps u and v through the
// adjoint kernel; with an even kernel both sides use the same commutator.
InterchangeResult interchange_residual(const SpaceTimeFunction& u, const SpaceTimeFunction& v,
                                       const VelocityFieldSpec& b, double eta, const StripGrid& grid);

// Any b: lhs = int (r_eta(u, b) - (u * rho_hat) div b) v and the mirrored rhs.
InterchangeResult generalized_interchange_residual(const SpaceTimeFunction& u, const SpaceTimeFunction& v,
                                                   const VelocityFieldSpec& b, double eta, const StripGrid& grid);

struct TraceReport {
  SampledField residual;
  double norm = 0.0;  // L^1 for the boundary trace, L^p for the initial trace
};

// u_eta(x', 0, t) (b . nu)(x', t) - ((h b . nu) * rho_tilde)(x', t) on the
// boundary nodes with |x'_i| <= A - eta and t <= T - eta.
TraceReport boundary_trace_residual(const SampledField& u, const VelocityFieldSpec& b, const SpaceTimeFunction& h,
                                    double eta);

// u_eta(x, 0) - (u0 * rho_hat)(x) over the admissible strip, L^p norm.
TraceReport initial_trace_residual(const SampledField& u, const SpaceTimeFunction& u0, double eta, double p);

}  // namespace halfmoll
