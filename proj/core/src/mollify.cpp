#include "halfmoll/mollify.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "halfmoll/error.hpp"
#include "halfmoll/kernels.hpp"
#include "halfmoll/parallel.hpp"

namespace halfmoll {
namespace {

constexpr double kFitSlack = 1e-9;

void check_eta(double eta) {
  require(std::isfinite(eta) && eta > 0.0, ErrorKind::invalid_parameter, "eta must be positive and finite");
}

void check_resolution(double eta, double spacing) {
  check_eta(eta);
  if (!(eta >= 2.0 * spacing * (1.0 - 1e-12))) fail(ErrorKind::under_resolved, "eta = " + std::to_string(eta) + " is below two grid spacings (h = " + std::to_string(spacing) + ")");
}

// Kernels narrower than eight cells are resolved on a 4x finer lattice.
std::size_t refine_factor(double eta, double step) { return eta < 8.0 * step ? 4 : 1; }

Axis refined(const Axis& a, std::size_t r) {
  return Axis{a.lo, a.step / static_cast<double>(r), (a.count - 1) * r + 1};
}

struct AxisPlan {
  Axis coarse;
  std::size_t refine = 1;
  StencilRole role = StencilRole::symmetric;
  std::size_t limit = std::numeric_limits<std::size_t>::max();
};

// Applies a separable kernel axis by axis. The input lives on the coarse axes
// (refined here) or, with `input_fine`, already on the refined lattice.
// Outputs land on the coarse nodes whose stencil fits inside the lattice.
DenseArray separable(DenseArray data, std::span<const AxisPlan> plans, bool input_fine, int derivative_axis,
                     double eta, std::vector<Axis>& out_axes) {
  out_axes.assign(plans.size(), Axis{});
  for (std::size_t a = 0; a < plans.size(); ++a) {
    const AxisPlan& p = plans[a];
    if (!input_fine) data = refine_axis(data, a, p.refine);
    const double fine_step = p.coarse.step / static_cast<double>(p.refine);
    const Stencil1D st = static_cast<int>(a) == derivative_axis ? derivative_stencil(p.role, eta, fine_step)
                                                                : value_stencil(p.role, eta, fine_step);
    const long r = static_cast<long>(p.refine);
    const long fine_last = static_cast<long>(p.coarse.count - 1) * r;
    const long j_lo = st.first >= 0 ? 0 : (-st.first + r - 1) / r;
    const long room = fine_last - st.last();
    require(room >= 0, ErrorKind::domain, "kernel support is wider than the grid");
    const long j_hi = room / r;
    require(j_hi >= j_lo, ErrorKind::domain, "no grid node admits the full kernel support");
    const std::size_t count =
        std::min(static_cast<std::size_t>(j_hi - j_lo + 1), p.limit);
    data = convolve_axis(data, a, st, static_cast<std::size_t>(j_lo * r), p.refine, count);
    out_axes[a] = Axis{p.coarse.node(static_cast<std::size_t>(j_lo)), p.coarse.step, count};
  }
  return data;
}

std::vector<std::size_t> shape_of(const std::vector<Axis>& axes) {
  std::vector<std::size_t> s;
  for (const Axis& a : axes) s.push_back(a.count);
  return s;
}

// Samples `outputs` functions at once on a tensor lattice; fn(point, out).
template <typename Fn>
std::vector<DenseArray> sample_lattice(const std::vector<Axis>& axes, std::size_t outputs, Fn&& fn) {
  std::vector<DenseArray> arrays(outputs, DenseArray(shape_of(axes)));
  const std::size_t rows = axes.front().count;
  const std::size_t per_row = arrays.front().size() / rows;
  parallel_for(rows, [&](std::size_t i0) {
    std::vector<double> point(axes.size());
    std::vector<double> out(outputs);
    point[0] = axes[0].node(i0);
    for (std::size_t k = 0; k < per_row; ++k) {
      std::size_t rest = k;
      for (std::size_t a = axes.size(); a-- > 1;) {
        point[a] = axes[a].node(rest % axes[a].count);
        rest /= axes[a].count;
      }
      fn(std::span<const double>(point), std::span<double>(out));
      for (std::size_t m = 0; m < outputs; ++m) arrays[m].data[i0 * per_row + k] = out[m];
    }
  });
  return arrays;
}

// Visits every node of a tensor stencil: fn(point, index).
template <typename Fn>
void visit_tensor(std::span<const Stencil1D> stencils, std::span<const double> center, Fn&& fn) {
  const std::size_t dims = stencils.size();
  std::vector<std::size_t> index(dims, 0);
  std::vector<double> point(dims);
  for (std::size_t a = 0; a < dims; ++a) point[a] = center[a] + stencils[a].offset(0);
  while (true) {
    fn(std::span<const double>(point), std::span<const std::size_t>(index));
    std::size_t a = dims;
    while (true) {
      if (a == 0) return;
      --a;
      if (++index[a] < stencils[a].weights.size()) {
        point[a] = center[a] + stencils[a].offset(index[a]);
        break;
      }
      index[a] = 0;
      point[a] = center[a] + stencils[a].offset(0);
    }
  }
}

void require_fit(const Axis& axis, double lo, double hi, ErrorKind kind, const std::string& what) {
  const double slack = kFitSlack * std::max(1.0, std::abs(axis.hi()) + std::abs(axis.lo));
  if (!(lo >= axis.lo - slack && hi <= axis.hi() + slack)) fail(kind, what + " [" + std::to_string(lo) + ", " + std::to_string(hi) + "] leaves the sampled range [" + std::to_string(axis.lo) + ", " + std::to_string(axis.hi()) + "]");
}

StencilRole normal_role(KernelOrientation o) {
  return o == KernelOrientation::forward ? StencilRole::forward : StencilRole::backward;
}

std::vector<Stencil1D> spatial_stencils(int dimension, double eta, int points, int derivative_axis,
                                        StencilRole normal = StencilRole::forward) {
  const double step = aligned_step(eta, points);
  std::vector<Stencil1D> out;
  for (int a = 0; a < dimension; ++a) {
    const StencilRole role = a == dimension - 1 ? normal : StencilRole::symmetric;
    out.push_back(a == derivative_axis ? derivative_stencil(role, eta, step) : value_stencil(role, eta, step));
  }
  return out;
}

// Pointwise commutator from the distributional form, for any evaluable u.
double commutator_value(const std::function<double(std::span<const double>)>& u, const VelocityFieldSpec& b,
                        double eta, std::span<const double> x, double s, int points) {
  const int d = b.dimension();
  require(static_cast<int>(x.size()) == d, ErrorKind::dimension, "commutator point has wrong dimension");
  const std::vector<Stencil1D> value = spatial_stencils(d, eta, points, -1);
  std::vector<Stencil1D> slope;
  for (int a = 0; a < d; ++a) slope.push_back(spatial_stencils(d, eta, points, a)[static_cast<std::size_t>(a)]);
  const std::vector<double> bx = b.value(x, s);
  std::vector<double> by(static_cast<std::size_t>(d));
  double total = 0.0;
  visit_tensor(value, x, [&](std::span<const double> y, std::span<const std::size_t> idx) {
    double wv = 1.0;
    for (int a = 0; a < d; ++a) wv *= value[a].weights[idx[a]];
    double transport = 0.0;
    bool any = wv != 0.0;
    std::vector<double> wd(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      double w = slope[j].weights[idx[j]];
      for (int a = 0; a < d && w != 0.0; ++a)
        if (a != j) w *= value[a].weights[idx[a]];
      wd[j] = w;
      any = any || w != 0.0;
    }
    if (!any) return;
    const double uy = u(y);
    if (uy == 0.0) return;
    b.value(y, s, by);
    for (int j = 0; j < d; ++j) transport += wd[j] * (by[j] - bx[j]);
    total += uy * (transport - wv * b.divergence(y, s));
  });
  return total;
}

void check_sampled_fit(const SampledField& u, double eta, std::span<const double> x, double s) {
  const std::size_t d = u.spatial_dims();
  require(x.size() == d, ErrorKind::dimension, "point has wrong dimension");
  const std::size_t off = u.time() ? 1 : 0;
  for (std::size_t a = 0; a < d; ++a) {
    const Axis& axis = u.layout()[off + a];
    const bool normal = a + 1 == d;
    require_fit(axis, normal ? x[a] : x[a] - eta, x[a] + eta, ErrorKind::truncation, "kernel support");
  }
  if (u.time()) require_fit(*u.time(), s, s, ErrorKind::out_of_horizon, "time");
}

std::vector<AxisPlan> spatial_plans(const StripGrid& grid, double eta, StencilRole normal) {
  std::vector<AxisPlan> plans;
  for (std::size_t a = 0; a < grid.axes().size(); ++a) {
    const Axis& axis = grid.axes()[a];
    plans.push_back(AxisPlan{axis, refine_factor(eta, axis.step),
                             a + 1 == grid.axes().size() ? normal : StencilRole::symmetric});
  }
  return plans;
}

std::vector<Axis> fine_axes(std::span<const AxisPlan> plans) {
  std::vector<Axis> out;
  for (const AxisPlan& p : plans) out.push_back(refined(p.coarse, p.refine));
  return out;
}

// r(u) (minus (u * K) div b when `generalized`) on the admissible nodes.
SampledField commutator_array(const SpaceTimeFunction& u, const VelocityFieldSpec& b, double eta,
                              const StripGrid& grid, double s, KernelOrientation orientation, bool generalized) {
  const int d = grid.dimension();
  require(b.dimension() == d, ErrorKind::dimension, "field and grid dimensions differ");
  check_resolution(eta, grid.spacing());
  const std::vector<AxisPlan> plans = spatial_plans(grid, eta, normal_role(orientation));
  const std::vector<Axis> lattice = fine_axes(plans);
  // Layout: u, u b_0..u b_{d-1}, u div b.
  const std::size_t n_out = static_cast<std::size_t>(d) + 2;
  const std::vector<DenseArray> arrays =
      sample_lattice(lattice, n_out, [&](std::span<const double> y, std::span<double> out) {
        const double uy = u(y, s);
        std::vector<double> by = b.value(y, s);
        out[0] = uy;
        for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(j) + 1] = uy * by[static_cast<std::size_t>(j)];
        out[n_out - 1] = uy * b.divergence(y, s);
      });
  std::vector<Axis> out_axes;
  DenseArray result = separable(arrays[n_out - 1], plans, true, -1, eta, out_axes);
  for (double& v : result.data) v = -v;
  std::vector<DenseArray> grad_u;
  std::vector<DenseArray> grad_ub;
  for (int j = 0; j < d; ++j) {
    grad_u.push_back(separable(arrays[0], plans, true, j, eta, out_axes));
    grad_ub.push_back(separable(arrays[static_cast<std::size_t>(j) + 1], plans, true, j, eta, out_axes));
  }
  DenseArray smoothed;
  if (generalized) smoothed = separable(arrays[0], plans, true, -1, eta, out_axes);
  const StripGrid out_grid = StripGrid::box(out_axes);
  const std::vector<DenseArray> b_nodes =
      sample_lattice(out_axes, static_cast<std::size_t>(d) + 1, [&](std::span<const double> x, std::span<double> out) {
        std::vector<double> bx = b.value(x, s);
        for (int j = 0; j < d; ++j) out[static_cast<std::size_t>(j)] = bx[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(d)] = generalized ? b.divergence(x, s) : 0.0;
      });
  for (std::size_t i = 0; i < result.size(); ++i) {
    double v = result.data[i];
    for (std::size_t j = 0; j < static_cast<std::size_t>(d); ++j)
      v += grad_ub[j].data[i] - b_nodes[j].data[i] * grad_u[j].data[i];
    if (generalized) v -= smoothed.data[i] * b_nodes[static_cast<std::size_t>(d)].data[i];
    result.data[i] = v;
  }
  return SampledField(out_grid, std::nullopt, std::move(result.data));
}

// Index range of `inner` nodes within `outer` (same step, nested).
std::pair<std::size_t, std::size_t> nested_range(const Axis& outer, const Axis& inner) {
  const double pos = (inner.lo - outer.lo) / outer.step;
  const auto first = static_cast<std::size_t>(std::llround(pos));
  return {first, first + inner.count};
}

void check_margin(const SpaceTimeFunction& f, const StripGrid& grid, double margin, const char* name) {
  const SampledField sampled = SampledField::sample(grid, std::nullopt, f);
  double peak = 0.0;
  for (double v : sampled.values()) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return;
  for (std::size_t i = 0; i < sampled.values().size(); ++i) {
    const std::vector<double> x = sampled.spatial_node(i);
    bool near_edge = false;
    for (std::size_t a = 0; a < x.size(); ++a) {
      const Axis& axis = grid.axes()[a];
      near_edge = near_edge || x[a] < axis.lo + margin || x[a] > axis.hi() - margin;
    }
    if (!(!near_edge || std::abs(sampled.values()[i]) <= 1e-10 * peak)) fail(ErrorKind::coverage, std::string(name) + " must vanish within 2 eta of the grid edges");
  }
}

// Trapezoid pairing of two fields restricted to their common nodes.
std::pair<double, double> paired_integrals(const SampledField& ru, const SampledField& rv, const SpaceTimeFunction& u,
                                           const SpaceTimeFunction& v) {
  std::vector<Axis> common;
  const auto& a1 = ru.grid().axes();
  const auto& a2 = rv.grid().axes();
  for (std::size_t a = 0; a < a1.size(); ++a) {
    const double lo = std::max(a1[a].lo, a2[a].lo);
    const double hi = std::min(a1[a].hi(), a2[a].hi());
    const auto n = static_cast<std::size_t>(std::llround((hi - lo) / a1[a].step)) + 1;
    common.push_back(Axis{lo, a1[a].step, n});
  }
  std::vector<std::vector<double>> weights;
  std::vector<std::size_t> off1;
  std::vector<std::size_t> off2;
  for (std::size_t a = 0; a < common.size(); ++a) {
    weights.push_back(trapezoid_weights(common[a]));
    off1.push_back(nested_range(a1[a], common[a]).first);
    off2.push_back(nested_range(a2[a], common[a]).first);
  }
  const std::size_t total =
      std::accumulate(common.begin(), common.end(), std::size_t{1}, [](std::size_t n, const Axis& a) { return n * a.count; });
  std::vector<double> lhs_terms(total);
  std::vector<double> rhs_terms(total);
  parallel_for(total, [&](std::size_t k) {
    std::vector<std::size_t> i1(common.size());
    std::vector<std::size_t> i2(common.size());
    std::vector<double> x(common.size());
    double w = 1.0;
    std::size_t rest = k;
    for (std::size_t a = common.size(); a-- > 0;) {
      const std::size_t i = rest % common[a].count;
      rest /= common[a].count;
      i1[a] = off1[a] + i;
      i2[a] = off2[a] + i;
      x[a] = common[a].node(i);
      w *= weights[a][i];
    }
    lhs_terms[k] = w * ru.at(i1) * v(x, 0.0);
    rhs_terms[k] = w * rv.at(i2) * u(x, 0.0);
  });
  return {pairwise_sum(lhs_terms), pairwise_sum(rhs_terms)};
}

InterchangeResult interchange_impl(const SpaceTimeFunction& u, const SpaceTimeFunction& v, const VelocityFieldSpec& b,
                                   double eta, const StripGrid& grid, bool generalized) {
  check_margin(u, grid, 2.0 * eta, "u");
  check_margin(v, grid, 2.0 * eta, "v");
  const SampledField ru = commutator_array(u, b, eta, grid, 0.0, KernelOrientation::forward, generalized);
  const SampledField rv = commutator_array(v, b, eta, grid, 0.0, KernelOrientation::reflected, generalized);
  const auto [lhs, rhs] = paired_integrals(ru, rv, u, v);
  return InterchangeResult{lhs, rhs, lhs - rhs};
}

DenseArray truncate_last_axis(const DenseArray& in, std::size_t keep) {
  const std::size_t n = in.shape.back();
  if (keep >= n) return in;
  std::vector<std::size_t> shape = in.shape;
  shape.back() = keep;
  DenseArray out(shape);
  const std::size_t rows = in.size() / n;
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(in.data.begin() + static_cast<std::ptrdiff_t>(r * n), keep,
                out.data.begin() + static_cast<std::ptrdiff_t>(r * keep));
  return out;
}

DenseArray as_dense(const SampledField& f) {
  DenseArray out(shape_of(f.layout()));
  std::copy(f.values().begin(), f.values().end(), out.data.begin());
  return out;
}

std::vector<AxisPlan> solution_plans(const SampledField& u, double eta) {
  std::vector<AxisPlan> plans;
  const std::size_t off = u.time() ? 1 : 0;
  if (u.time()) plans.push_back(AxisPlan{*u.time(), refine_factor(eta, u.time()->step), StencilRole::forward});
  const std::size_t d = u.spatial_dims();
  for (std::size_t a = 0; a < d; ++a) {
    const Axis& axis = u.layout()[off + a];
    plans.push_back(AxisPlan{axis, refine_factor(eta, axis.step),
                             a + 1 == d ? StencilRole::forward : StencilRole::symmetric});
  }
  return plans;
}

void check_bulk_solution(const SampledField& u, double eta) {
  require(u.support() == Support::bulk, ErrorKind::dimension, "expected a bulk field");
  check_resolution(eta, u.grid().spacing());
}

}  // namespace

ApproximateSolution::ApproximateSolution(SampledField source, double eta, SampledField values)
    : source_(std::move(source)), eta_(eta), values_(std::move(values)) {
  check_eta(eta_);
}

double ApproximateSolution::quadrature(std::span<const double> x, double t, int derivative_axis,
                                       MollifyOptions options) const {
  const std::size_t d = source_.spatial_dims();
  check_sampled_fit(source_, eta_, x, t);
  const bool timed = source_.time().has_value();
  if (timed) require_fit(*source_.time(), t, t + eta_, ErrorKind::out_of_horizon, "time kernel support");
  const double step = aligned_step(eta_, options.points_per_width);
  std::vector<Stencil1D> stencils;
  std::vector<double> center;
  int axis = 0;
  auto add = [&](StencilRole role, double c) {
    stencils.push_back(axis == derivative_axis ? derivative_stencil(role, eta_, step) : value_stencil(role, eta_, step));
    center.push_back(c);
    ++axis;
  };
  if (timed) add(StencilRole::forward, t);
  for (std::size_t a = 0; a < d; ++a) add(a + 1 == d ? StencilRole::forward : StencilRole::symmetric, x[a]);
  std::vector<const Stencil1D*> ptrs;
  for (const Stencil1D& s : stencils) ptrs.push_back(&s);
  return tensor_quadrature(ptrs, center, [&](std::span<const double> p) {
    return timed ? source_.interpolate(p.subspan(1), p[0]) : source_.interpolate(p, 0.0);
  });
}

double ApproximateSolution::evaluate(std::span<const double> x, double t, MollifyOptions options) const {
  return quadrature(x, t, -1, options);
}

double ApproximateSolution::time_derivative(std::span<const double> x, double t, MollifyOptions options) const {
  require(source_.time().has_value(), ErrorKind::dimension, "source has no time axis");
  return quadrature(x, t, 0, options);
}

std::vector<double> ApproximateSolution::gradient(std::span<const double> x, double t, MollifyOptions options) const {
  const int off = source_.time() ? 1 : 0;
  std::vector<double> g(source_.spatial_dims());
  for (std::size_t a = 0; a < g.size(); ++a) g[a] = quadrature(x, t, off + static_cast<int>(a), options);
  return g;
}

ApproximateSolution mollify_solution(const SampledField& u, double eta) {
  check_bulk_solution(u, eta);
  const std::vector<AxisPlan> plans = solution_plans(u, eta);
  std::vector<Axis> out_axes;
  DenseArray values = separable(as_dense(u), plans, false, -1, eta, out_axes);
  std::optional<Axis> time;
  if (u.time()) {
    time = out_axes.front();
    out_axes.erase(out_axes.begin());
  }
  SampledField field(StripGrid::box(out_axes), time, std::move(values.data));
  return ApproximateSolution(u, eta, std::move(field));
}

MollifiedData mollify_data(const VelocityFieldSpec& b, const ScalarDataSpec& data, double eta,
                           std::optional<double> horizon, MollifyOptions options) {
  check_eta(eta);
  const int d = b.dimension();
  auto check_horizon = [eta, horizon](double t) {
    if (horizon)
      if (!(t + eta <= *horizon * (1.0 + 1e-12) + 1e-12)) fail(ErrorKind::out_of_horizon, "t + eta = " + std::to_string(t + eta) + " exceeds the horizon " + std::to_string(*horizon));
  };
  VelocityFieldSpec::Metadata meta = b.metadata();
  meta.name += "~eta=" + std::to_string(eta);

  std::optional<VelocityFieldSpec> velocity;
  if (b.affine() && b.metadata().autonomous) {
    AffineForm form = *b.affine();
    const double shift = eta * moment(1);
    for (int i = 0; i < d; ++i)
      form.offset[static_cast<std::size_t>(i)] += form.matrix[static_cast<std::size_t>(i * d + d - 1)] * shift;
    velocity = VelocityFieldSpec::from_affine(std::move(form), meta, b.sup_bound());
  } else {
    // Averages every component of `eval` (size m) over the space-time kernel.
    const bool timed = !b.metadata().autonomous;
    auto field = std::make_shared<const VelocityFieldSpec>(b);
    auto average = [field, eta, timed, d, options, check_horizon](std::span<const double> x, double t, std::size_t m,
                                                                  auto&& eval, std::span<double> out) {
      if (timed) check_horizon(t);
      std::vector<Stencil1D> st = spatial_stencils(d, eta, options.points_per_width, -1);
      std::vector<double> center(x.begin(), x.end());
      if (timed) {
        st.insert(st.begin(), value_stencil(StencilRole::forward, eta, aligned_step(eta, options.points_per_width)));
        center.insert(center.begin(), t);
      }
      std::fill(out.begin(), out.end(), 0.0);
      std::vector<double> buf(m);
      visit_tensor(st, center, [&](std::span<const double> p, std::span<const std::size_t> idx) {
        double w = 1.0;
        for (std::size_t a = 0; a < st.size() && w != 0.0; ++a) w *= st[a].weights[idx[a]];
        if (w == 0.0) return;
        if (timed)
          eval(p.subspan(1), p[0], std::span<double>(buf));
        else
          eval(p, t, std::span<double>(buf));
        for (std::size_t k = 0; k < m; ++k) out[k] += w * buf[k];
      });
    };
    const auto n = static_cast<std::size_t>(d);
    VelocityFieldSpec::Evaluator value = [field, average, n](std::span<const double> x, double t, std::span<double> out) {
      average(x, t, n, [&](std::span<const double> y, double s, std::span<double> o) { field->value(y, s, o); }, out);
    };
    VelocityFieldSpec::Evaluator gradient = [field, average, n](std::span<const double> x, double t,
                                                               std::span<double> out) {
      average(x, t, n * n, [&](std::span<const double> y, double s, std::span<double> o) { field->gradient(y, s, o); },
              out);
    };
    VelocityFieldSpec::ScalarEvaluator divergence = [field, average](std::span<const double> x, double t) {
      double out = 0.0;
      average(x, t, 1,
              [&](std::span<const double> y, double s, std::span<double> o) { o[0] = field->divergence(y, s); },
              std::span<double>(&out, 1));
      return out;
    };
    velocity = VelocityFieldSpec(d, std::move(value), std::move(gradient), std::move(divergence), b.solenoidal(),
                                 b.sup_bound(), meta);
  }

  SpaceTimeFunction boundary;
  if (data.boundary) {
    const QuadratureOptions q{options.points_per_width};
    boundary = [h = data.boundary, d, eta, q, check_horizon](std::span<const double> x, double t) {
      check_horizon(t);
      return convolve_boundary_spacetime(h, static_cast<std::size_t>(d - 1), eta, x, t, q);
    };
  }
  SpaceTimeFunction initial;
  if (data.initial) {
    const QuadratureOptions q{options.points_per_width};
    initial = [u0 = data.initial, d, eta, q](std::span<const double> x, double) {
      return convolve_half_space([&](std::span<const double> y) { return u0(y, 0.0); }, d, eta, x, q);
    };
  }
  return MollifiedData{std::move(*velocity), std::move(boundary), std::move(initial), eta};
}

CommutatorSample commutator(const SpaceTimeFunction& u, const VelocityFieldSpec& b, double eta,
                            std::span<const double> x, double s, MollifyOptions options) {
  check_eta(eta);
  require(!x.empty() && x.back() >= 0.0, ErrorKind::domain, "commutator point must satisfy x_d >= 0");
  const double value =
      commutator_value([&](std::span<const double> y) { return u(y, s); }, b, eta, x, s, options.points_per_width);
  return CommutatorSample{{x.begin(), x.end()}, s, value, CommutatorMethod::distributional};
}

CommutatorSample commutator(const SampledField& u, const VelocityFieldSpec& b, double eta,
                            std::span<const double> x, double s, MollifyOptions options) {
  check_resolution(eta, u.grid().spacing());
  check_sampled_fit(u, eta, x, s);
  const double value = commutator_value([&](std::span<const double> y) { return u.interpolate(y, s); }, b, eta, x, s,
                                        options.points_per_width);
  return CommutatorSample{{x.begin(), x.end()}, s, value, CommutatorMethod::distributional};
}

CommutatorSample commutator_direct(const SpaceTimeFunction& u, const GradientFunction& grad_u,
                                   const VelocityFieldSpec& b, double eta, std::span<const double> x, double s,
                                   MollifyOptions options) {
  check_eta(eta);
  const int d = b.dimension();
  require(static_cast<int>(x.size()) == d, ErrorKind::dimension, "commutator point has wrong dimension");
  require(x.back() >= 0.0, ErrorKind::domain, "commutator point must satisfy x_d >= 0");
  const std::vector<Stencil1D> value = spatial_stencils(d, eta, options.points_per_width, -1);
  std::vector<Stencil1D> slope;
  for (int a = 0; a < d; ++a)
    slope.push_back(spatial_stencils(d, eta, options.points_per_width, a)[static_cast<std::size_t>(a)]);
  const std::vector<double> bx = b.value(x, s);
  std::vector<double> by(static_cast<std::size_t>(d));
  std::vector<double> gu(static_cast<std::size_t>(d));
  double smoothed_transport = 0.0;
  double transport_of_smoothed = 0.0;
  visit_tensor(value, x, [&](std::span<const double> y, std::span<const std::size_t> idx) {
    double wv = 1.0;
    for (int a = 0; a < d; ++a) wv *= value[a].weights[idx[a]];
    double directional = 0.0;
    for (int j = 0; j < d; ++j) {
      double w = slope[j].weights[idx[j]];
      for (int a = 0; a < d && w != 0.0; ++a)
        if (a != j) w *= value[a].weights[idx[a]];
      directional += w * bx[j];
    }
    if (wv == 0.0 && directional == 0.0) return;
    if (directional != 0.0) transport_of_smoothed += directional * u(y, s);
    if (wv != 0.0) {
      b.value(y, s, by);
      grad_u(y, s, gu);
      smoothed_transport += wv * std::inner_product(by.begin(), by.end(), gu.begin(), 0.0);
    }
  });
  return CommutatorSample{{x.begin(), x.end()}, s, smoothed_transport - transport_of_smoothed,
                          CommutatorMethod::smooth_direct};
}

SampledField commutator_field(const SpaceTimeFunction& u, const VelocityFieldSpec& b, double eta,
                              const StripGrid& grid, double s, KernelOrientation orientation) {
  return commutator_array(u, b, eta, grid, s, orientation, false);
}

bool ConvergenceReport::norm_decreasing() const {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].norm > rows[i - 1].norm) return false;
  return true;
}

double ConvergenceReport::decay_ratio() const {
  if (rows.empty() || rows.front().norm == 0.0) return 0.0;
  return rows.back().norm / rows.front().norm;
}

double ConvergenceReport::ratio_growth() const {
  double growth = 1.0;
  if (rows.empty() || rows.front().bound_ratio == 0.0) return growth;
  for (const ConvergenceRow& r : rows) growth = std::max(growth, r.bound_ratio / rows.front().bound_ratio);
  return growth;
}

std::string ConvergenceReport::csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "eta,norm,bound_ratio,wallclock_s\n";
  for (const ConvergenceRow& r : rows) out << r.eta << ',' << r.norm << ',' << r.bound_ratio << ',' << r.wallclock_s << '\n';
  return out.str();
}

std::string ConvergenceReport::metadata_json() const {
  nlohmann::json j;
  j["field"] = field_name;
  j["p"] = p;
  j["beta"] = std::isinf(beta) ? nlohmann::json("inf") : nlohmann::json(beta);
  j["alpha"] = alpha;
  j["grid_spacing"] = spacing;
  j["rows"] = rows.size();
  j["norm_decreasing"] = norm_decreasing();
  j["decay_ratio"] = decay_ratio();
  j["bound_ratio_growth"] = ratio_growth();
  return j.dump(2);
}

ConvergenceReport commutator_convergence(const SpaceTimeFunction& u, const VelocityFieldSpec& b, double p,
                                         double beta, std::span<const double> eta_list, const StripGrid& grid) {
  require(!eta_list.empty(), ErrorKind::invalid_parameter, "empty eta list");
  ConvergenceReport report;
  report.field_name = b.name();
  report.p = p;
  report.beta = beta;
  report.alpha = exponent_check(p, beta);
  report.spacing = grid.spacing();
  for (double eta : eta_list) check_resolution(eta, grid.spacing());
  const double u_norm = lp_norm(SampledField::sample(grid, std::nullopt, u), p);
  const double grad_norm = sobolev_seminorm(b, beta, grid, 0.0);
  const double scale = u_norm * grad_norm;
  for (double eta : eta_list) {
    const auto start = std::chrono::steady_clock::now();
    const SampledField r = commutator_field(u, b, eta, grid, 0.0);
    const double norm = lp_norm(r, report.alpha);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double ratio = scale > 0.0 ? norm / scale : (norm == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    report.rows.push_back(ConvergenceRow{eta, norm, ratio, elapsed});
  }
  return report;
}

double InterchangeResult::relative() const { return std::abs(residual) / (std::abs(lhs) + std::abs(rhs) + 1.0); }

InterchangeResult interchange_residual(const SpaceTimeFunction& u, const SpaceTimeFunction& v,
                                       const VelocityFieldSpec& b, double eta, const StripGrid& grid) {
  require(b.solenoidal(), ErrorKind::hypothesis_violation,
          "the interchange identity needs a divergence-free field; use the generalized form");
  return interchange_impl(u, v, b, eta, grid, false);
}

InterchangeResult generalized_interchange_residual(const SpaceTimeFunction& u, const SpaceTimeFunction& v,
                                                   const VelocityFieldSpec& b, double eta, const StripGrid& grid) {
  return interchange_impl(u, v, b, eta, grid, true);
}

TraceReport boundary_trace_residual(const SampledField& u, const VelocityFieldSpec& b, const SpaceTimeFunction& h,
                                    double eta) {
  check_bulk_solution(u, eta);
  require(u.time().has_value(), ErrorKind::dimension, "boundary trace needs a time axis");
  require(u.grid().is_half_space(), ErrorKind::domain, "boundary trace needs the face x_d = 0 in the grid");
  std::vector<AxisPlan> plans = solution_plans(u, eta);
  const AxisPlan normal = plans.back();
  // Only the rows within eta of the face contribute.
  const std::size_t keep = std::min(
      normal.coarse.count, static_cast<std::size_t>(std::ceil(eta / normal.coarse.step * (1.0 + 1e-12))) + 2);
  plans.back().coarse.count = keep;
  plans.back().limit = 1;
  std::vector<Axis> out_axes;
  const DenseArray trace = separable(truncate_last_axis(as_dense(u), keep), plans, false, -1, eta, out_axes);

  // (h b.nu) * rho_tilde over (t, x').
  std::vector<AxisPlan> face(plans.begin(), plans.end() - 1);
  std::vector<Axis> face_axes;
  for (const AxisPlan& p : face) face_axes.push_back(refined(p.coarse, p.refine));
  const std::vector<DenseArray> flux = sample_lattice(face_axes, 1, [&](std::span<const double> p, std::span<double> o) {
    o[0] = h(p.subspan(1), p[0]) * normal_trace(b, p.subspan(1), p[0]);
  });
  std::vector<Axis> rhs_axes;
  const DenseArray smoothed = separable(flux[0], face, true, -1, eta, rhs_axes);
  out_axes.pop_back();
  require(rhs_axes == out_axes, ErrorKind::domain, "trace lattices disagree");

  const std::vector<DenseArray> nu =
      sample_lattice(out_axes, 1, [&](std::span<const double> p, std::span<double> o) {
        o[0] = normal_trace(b, p.subspan(1), p[0]);
      });
  std::vector<double> residual(smoothed.size());
  for (std::size_t i = 0; i < residual.size(); ++i) residual[i] = trace.data[i] * nu[0].data[i] - smoothed.data[i];

  std::vector<Axis> parent(out_axes.begin() + 1, out_axes.end());
  parent.push_back(u.grid().normal_axis());
  SampledField field(BoundaryGrid(StripGrid::box(parent), out_axes.front()), std::move(residual));
  const double norm = lp_norm(field, 1.0);
  return TraceReport{std::move(field), norm};
}

TraceReport initial_trace_residual(const SampledField& u, const SpaceTimeFunction& u0, double eta, double p) {
  check_bulk_solution(u, eta);
  require(u.time().has_value(), ErrorKind::dimension, "initial trace needs a time axis");
  std::vector<AxisPlan> plans = solution_plans(u, eta);
  plans.front().limit = 1;
  std::vector<Axis> out_axes;
  DenseArray at_start = separable(as_dense(u), plans, false, -1, eta, out_axes);

  std::vector<AxisPlan> space(plans.begin() + 1, plans.end());
  const std::vector<DenseArray> initial = sample_lattice(
      fine_axes(space), 1, [&](std::span<const double> x, std::span<double> o) { o[0] = u0(x, 0.0); });
  std::vector<Axis> rhs_axes;
  const DenseArray smoothed = separable(initial[0], space, true, -1, eta, rhs_axes);
  std::vector<Axis> spatial(out_axes.begin() + 1, out_axes.end());
  require(rhs_axes == spatial, ErrorKind::domain, "trace lattices disagree");
  for (std::size_t i = 0; i < at_start.size(); ++i) at_start.data[i] -= smoothed.data[i];
  SampledField field(StripGrid::box(spatial), std::nullopt, std::move(at_start.data));
  const double norm = lp_norm(field, p);
  return TraceReport{std::move(field), norm};
}

}  // namespace halfmoll
