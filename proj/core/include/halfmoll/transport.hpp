#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "halfmoll/fields.hpp"
#include "halfmoll/grid.hpp"
#include "halfmoll/mollify.hpp"
#include "halfmoll/relabel.hpp"

namespace halfmoll {

// Residual tolerance attributed to the characteristics solver.
inline constexpr double kSolverTolerance = 1e-6;

// Where backward characteristics may travel. depth > 0 inside the physical
// domain, depth < 0 beyond its boundary.
class TransportDomain {
 public:
  virtual ~TransportDomain() = default;
  virtual int dimension() const = 0;
  virtual double depth(std::span<const double> x) const = 0;
  // Throws a truncation error when x has left the computational box.
  virtual void check_bounds(std::span<const double> x) const = 0;
  // Moves a point that is within rounding of the boundary onto it.
  virtual void snap_to_boundary(std::span<double> x) const = 0;
};

// The truncated strip |x_i| <= A, 0 <= x_d <= L.
class StripDomain final : public TransportDomain {
 public:
  explicit StripDomain(const StripGrid& grid);

  int dimension() const override { return static_cast<int>(axes_.size()); }
  double depth(std::span<const double> x) const override { return x.back(); }
  void check_bounds(std::span<const double> x) const override;
  void snap_to_boundary(std::span<double> x) const override { x.back() = 0.0; }

 private:
  std::vector<Axis> axes_;
};

enum class TerminalKind { hit_initial_plane, hit_boundary };

struct CharacteristicTrace {
  std::vector<double> start;
  double start_time = 0.0;
  TerminalKind kind = TerminalKind::hit_initial_plane;
  std::vector<double> terminal;
  double terminal_time = 0.0;
  std::size_t steps = 0;
};

// Integrates dX/ds = b(X, s) backward from (x, t) with classical RK4 of step
// `step` until s = 0 or the boundary is crossed; the crossing is located by
// bisection. Crossings within 1e-12 t of s = 0 resolve to the initial plane.
CharacteristicTrace trace_characteristic(const VelocityFieldSpec& b, const TransportDomain& domain,
                                         std::span<const double> x, double t, double step);

using BoundaryValue = std::function<double(std::span<const double> terminal, double t)>;

// Values of the classical solution on grid x times. `boundary` receives the
// Cartesian exit point. Nodes where `active` is false are set to 0.
SampledField solve_characteristics(const VelocityFieldSpec& b, const TransportDomain& domain, const StripGrid& grid,
                                   const Axis& times, const BoundaryValue& boundary, const SpaceTimeFunction& initial,
                                   const std::function<bool(std::span<const double>)>& active = {});

// Flat strip: h(x', t) takes the tangential coordinates of the exit point.
SampledField solve_characteristics(const VelocityFieldSpec& b, const SpaceTimeFunction& h,
                                   const SpaceTimeFunction& u0, const StripGrid& grid, const Axis& times);

// Tensor bump prod_k bump((z_k - c_k) / r_k) over z = (t, x), bump(s) =
// exp(-1 / (1 - s^2)) on |s| < 1.
class TestFunction {
 public:
  TestFunction(std::string id, std::vector<double> centre, std::vector<double> radii);

  const std::string& id() const noexcept { return id_; }
  int dimension() const noexcept { return static_cast<int>(centre_.size()) - 1; }
  double value(std::span<const double> x, double t) const;
  // out = (d/dt, d/dx_0, ..., d/dx_{d-1}).
  void gradient(std::span<const double> x, double t, std::span<double> out) const;
  // sup |phi| + sum_k sup |d_k phi|.
  double c1_norm() const;
  double support_lo(std::size_t k) const { return centre_[k] - radii_[k]; }
  double support_hi(std::size_t k) const { return centre_[k] + radii_[k]; }

 private:
  std::string id_;
  std::vector<double> centre_;
  std::vector<double> radii_;
};

// Five bumps for the constant-field front problem on [-A, A] x [0, L] x [0, T)
// in d = 2: across the front, x_d-independent near the boundary, touching
// t = 0 away from the boundary, ahead of the front, and tangentially offset.
std::vector<TestFunction> front_test_functions(double half_width, double depth, double horizon);

struct WeakResidualReport {
  std::string test_function;
  double value = 0.0;
  double error_estimate = 0.0;  // Richardson estimate from the stride-2 sub-lattice
  double c1_norm = 0.0;
};

// -int int u d_t phi - int u0 phi(., 0) + int int h (b . nu) phi - int int u div(phi b).
WeakResidualReport weak_residual(const SampledField& u, const VelocityFieldSpec& b, const SpaceTimeFunction& h,
                                 const SpaceTimeFunction& u0, const TestFunction& phi);

SampledField renormalize(const SampledField& u, const RelabelFunction& theta);

struct GronwallRow {
  double time = 0.0;
  double energy = 0.0;  // ||u(t)||_p^p
  double bound = 0.0;   // (||u(0)||_p^p + M2 t) exp(M1 t)
};

struct GronwallReport {
  double p = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  std::vector<GronwallRow> rows;

  bool holds(double slack = 1.05) const;
  // Smallest factor c with energy <= c * bound at every node.
  double repair_factor() const;
};

// M1 = sup |div b|, M2 = sup |b| * sup_t ||h(t)||_p^p over the grid face.
GronwallReport gronwall_check(const SampledField& u, const VelocityFieldSpec& b, const SpaceTimeFunction& h,
                              double p);

struct UniquenessReport {
  double p = 0.0;
  std::vector<double> etas;
  // ||u_{eta_k} - u_{eta_{k+1}}||_p over space-time, and per time slice.
  std::vector<double> differences;
  std::vector<std::vector<double>> slice_differences;
  std::vector<double> times;
  // Solution change when h is perturbed on {b . nu >= 0} (finest eta).
  double outflow_max_difference = 0.0;
  std::size_t outflow_changed_nodes = 0;

  ConvergenceReport as_convergence() const;
};

// Solves with data mollified at each eta of `etas` and compares consecutive
// levels; also re-solves with h + perturbation restricted to the outflow set.
UniquenessReport uniqueness_experiment(const VelocityFieldSpec& b, const ScalarDataSpec& data,
                                       std::span<const double> etas, const StripGrid& grid, const Axis& times,
                                       const SpaceTimeFunction& outflow_perturbation);

}  // namespace halfmoll
