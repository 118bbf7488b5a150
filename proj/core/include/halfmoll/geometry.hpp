#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "halfmoll/fields.hpp"
#include "halfmoll/grid.hpp"
#include "halfmoll/mollify.hpp"
#include "halfmoll/transport.hpp"

namespace halfmoll {

using Point2 = std::array<double, 2>;

enum class DomainKind { disk, annulus, half_plane };

// Tubular coordinates of a point near the boundary: the boundary component,
// arc length of the projection along it, and depth s = -d(x) (> 0 inside).
struct TubularPoint {
  int component = 0;
  double arc = 0.0;
  double depth = 0.0;
};

// Analytic 2-D domains with closed-form distance, projection and curvature.
// Signed distance d(x) is negative inside. Curvature is signed so that the
// area element in tubular coordinates is J = 1 - kappa * depth: +1/R on a
// circle bounding the domain from outside, -1/R on a hole of radius R.
class SmoothDomain2D final : public TransportDomain {
 public:
  static SmoothDomain2D disk(double radius);
  static SmoothDomain2D annulus(double inner, double outer);
  // {x_1 > 0}; `band` sets the tubular width.
  static SmoothDomain2D half_plane(double band = 0.25);

  DomainKind kind() const noexcept { return kind_; }
  double tubular_width() const noexcept { return delta_; }
  int component_count() const noexcept { return kind_ == DomainKind::annulus ? 2 : 1; }
  // Length of a boundary component; infinite for the half-plane.
  double component_length(int component) const;

  double signed_distance(std::span<const double> x) const;
  Point2 project(std::span<const double> x) const;
  double curvature(int component) const;
  Point2 outward_normal(std::span<const double> boundary_point) const;
  // J = 1 - kappa(pi(x)) * depth, for |d(x)| < 2 delta.
  double jacobian(std::span<const double> x) const;

  TubularPoint to_tubular(std::span<const double> x) const;
  Point2 from_tubular(const TubularPoint& p) const;

  int dimension() const override { return 2; }
  double depth(std::span<const double> x) const override { return -signed_distance(x); }
  void check_bounds(std::span<const double> x) const override;
  void snap_to_boundary(std::span<double> x) const override;

 private:
  SmoothDomain2D(DomainKind kind, double r1, double r2, double delta);
  int nearest_component(std::span<const double> x) const;

  DomainKind kind_;
  double r1_;
  double r2_;
  double delta_;
};

// int_band f = sum over components of int arc int_0^width f(Lambda^{-1}) J ds,
// periodic trapezoid in arc and Gauss-Kronrod in depth. Not for the half-plane.
double band_integral(const std::function<double(const Point2&)>& f, const SmoothDomain2D& domain, double width,
                     int arc_points = 512);

// u_eta at x through the tubular coordinates: symmetric kernel in arc length,
// one-sided kernel in depth (into the domain), one-sided in time when u has a
// time axis. Unit weight in (arc, depth): u = c gives c exactly.
double tubular_mollify(const SpaceTimeFunction& u, const SmoothDomain2D& domain, double eta,
                       std::span<const double> x, double t, bool timed, MollifyOptions options = {});
double tubular_mollify(const SampledField& u, const SmoothDomain2D& domain, double eta, std::span<const double> x,
                       double t, MollifyOptions options = {});

// Classical solution on the nodes of `grid`: interior nodes by backward
// characteristics, exterior nodes within the band copy the value at pi(x),
// everything else is 0. `h` takes the Cartesian boundary point.
SampledField solve_curved(const VelocityFieldSpec& b, const SmoothDomain2D& domain, const StripGrid& grid,
                          const Axis& times, const SpaceTimeFunction& h, const SpaceTimeFunction& u0);

struct CurvedTraceReport {
  Axis times;
  std::vector<Axis> arcs;        // per boundary component, periodic
  std::vector<double> residual;  // component, time, arc (arc fastest)
  double l1_norm = 0.0;
};

// u_eta (b . nu) - (h b . nu) * rho_tilde on the boundary, tangential kernel
// along arc length; times t with t + eta <= T.
CurvedTraceReport curved_trace_residual(const SampledField& u, const VelocityFieldSpec& b, const SpaceTimeFunction& h,
                                        double eta, const SmoothDomain2D& domain, MollifyOptions options = {});

// b = -x / |x| (b(0) = 0): radial inflow through a circle centred at 0.
VelocityFieldSpec radial_inflow();

}  // namespace halfmoll
