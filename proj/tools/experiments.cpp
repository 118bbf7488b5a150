#include "experiments.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>

#include "halfmoll/error.hpp"
#include "halfmoll/fields.hpp"
#include "halfmoll/geometry.hpp"
#include "halfmoll/mollify.hpp"
#include "halfmoll/relabel.hpp"
#include "halfmoll/serialize.hpp"
#include "halfmoll/transport.hpp"

namespace halfmoll::cli {
namespace fs = std::filesystem;

bool RunResult::passed() const {
  for (const Check& c : checks)
    if (!c.ok) return false;
  return true;
}

namespace {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string brief(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string label(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string cell_text(const Table::Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  return format_number(std::get<double>(c));
}

}  // namespace

Table::Table(std::string property, std::vector<std::string> columns)
    : property_(std::move(property)), columns_(std::move(columns)) {}

void Table::add(std::vector<Cell> row) {
  require(row.size() == columns_.size(), ErrorKind::dimension, "table row has the wrong number of cells");
  rows_.push_back(std::move(row));
}

std::vector<fs::path> Table::write(const fs::path& dir, const std::string& stem) const {
  const fs::path csv = dir / (stem + ".csv");
  const fs::path dat = dir / (stem + ".dat");
  std::ofstream c(csv);
  std::ofstream d(dat);
  if (!c || !d) fail(ErrorKind::io, "cannot write into " + dir.string());
  c << "# property: " << property_ << '\n';
  d << "# property: " << property_ << "\n#";
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    c << (i ? "," : "") << columns_[i];
    d << ' ' << columns_[i];
  }
  c << '\n';
  d << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      c << (i ? "," : "") << cell_text(row[i]);
      d << (i ? " " : "") << cell_text(row[i]);
    }
    c << '\n';
    d << '\n';
  }
  return {csv, dat};
}

namespace {

struct Context {
  const ExperimentConfig& config;
  RunResult result;

  void check(std::string name, bool ok, std::string detail) {
    result.checks.push_back({std::move(name), ok, std::move(detail)});
  }
  void emit(const Table& table, const std::string& stem) {
    for (auto& f : table.write(config.output, stem)) result.files.push_back(std::move(f));
  }
  SpaceTimeFunction initial() const { return builtin_scalar(config.initial, config.grid.dimension); }
  SpaceTimeFunction boundary() const { return builtin_scalar(config.boundary, config.grid.dimension); }
  VelocityFieldSpec field() const { return builtin_field(config.field, config.grid.dimension); }
  MollifyOptions options() const { return {config.points_per_width}; }
};

void converge_commutator(Context& ctx) {
  const auto& c = ctx.config;
  const auto report = commutator_convergence(ctx.initial(), ctx.field(), c.p, c.beta, c.etas, c.strip());
  Table table("commutator of the one-sided mollifier with the field tends to zero in L^alpha as eta decreases",
              {"eta", "norm", "bound_ratio"});
  nlohmann::json wallclock = nlohmann::json::array();
  for (const auto& row : report.rows) {
    table.add({row.eta, row.norm, row.bound_ratio});
    wallclock.push_back(row.wallclock_s);
  }
  ctx.emit(table, "converge_commutator");
  ctx.result.summary = nlohmann::json::parse(report.metadata_json());
  ctx.result.summary["wallclock_s"] = wallclock;

  const double first = report.rows.front().norm;
  if (first <= 1e-8) {
    double worst = 0.0;
    for (const auto& row : report.rows) worst = std::max(worst, row.norm);
    ctx.check("commutator vanishes", worst <= 1e-8, "max norm " + brief(worst));
    return;
  }
  ctx.check("norm decreases", report.norm_decreasing(), "monotone over " + std::to_string(report.rows.size()) + " etas");
  ctx.check("final/initial < 0.3", report.decay_ratio() < 0.3, brief(report.decay_ratio()));
  ctx.check("bound ratio within x2", report.ratio_growth() <= 2.0, brief(report.ratio_growth()));
}

void interchange(Context& ctx) {
  const auto& c = ctx.config;
  const auto b = ctx.field();
  const auto u = ctx.initial();
  // v is u shifted by a seeded offset.
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> jitter(-0.1, 0.1);
  std::vector<double> shift(static_cast<std::size_t>(c.grid.dimension));
  for (double& s : shift) s = jitter(rng);
  const SpaceTimeFunction v = [u, shift](std::span<const double> x, double t) {
    std::vector<double> y(x.begin(), x.end());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= shift[i];
    return u(y, t);
  };
  const std::string form = b.solenoidal() ? "plain" : "generalized";
  Table table("pairing of the commutator with a test function is symmetric under the adjoint kernel",
              {"eta", "spacing", "form", "lhs", "rhs", "residual", "relative"});
  constexpr double kFloor = 1e-12;
  for (double eta : c.etas) {
    std::vector<double> rel;
    for (double h : {c.grid.spacing, c.grid.spacing / 2}) {
      const StripGrid grid(c.grid.dimension, c.grid.half_width, c.grid.depth, h);
      const auto r = b.solenoidal() ? interchange_residual(u, v, b, eta, grid)
                                    : generalized_interchange_residual(u, v, b, eta, grid);
      table.add({eta, h, form, r.lhs, r.rhs, r.residual, r.relative()});
      rel.push_back(r.relative());
    }
    const std::string tag = "eta=" + label(eta);
    ctx.check(tag + " relative residual <= 1e-6", rel[0] <= 1e-6 && rel[1] <= 1e-6, brief(rel[0]) + ", " + brief(rel[1]));
    const bool floor = std::max(rel[0], rel[1]) <= kFloor;
    ctx.check(tag + " stable under halving", floor || rel[1] * 3.0 <= rel[0],
              floor ? "at roundoff floor" : "shrink x" + brief(rel[0] / rel[1]));
  }
  ctx.emit(table, "interchange");
  ctx.result.summary["shift"] = shift;
  ctx.result.summary["form"] = form;
}

void trace_check(Context& ctx) {
  const auto& c = ctx.config;
  const auto b = ctx.field();
  const auto u0 = ctx.initial();
  const auto h = ctx.boundary();
  const auto grid = c.strip();
  const auto times = c.times();
  Table table("boundary trace of the mollified solution times b.nu matches the mollified inflow flux, and the initial "
              "trace matches the mollified initial data",
              {"eta", "data_eta", "boundary_l1", "initial_lp", "budget"});
  std::vector<double> norms;
  for (std::size_t k = 0; k < c.etas.size(); ++k) {
    const double eta = c.etas[k];
    const auto md = mollify_data(b, ScalarDataSpec{u0, h, c.p, 0.0}, c.data_eta_factor * eta, std::nullopt, ctx.options());
    const auto u = solve_characteristics(md.velocity, md.boundary, md.initial, grid, times);
    const auto boundary = boundary_trace_residual(u, b, h, eta);
    const auto initial = initial_trace_residual(u, u0, eta, c.p);
    const double budget = 5.0 * (grid.spacing() * grid.spacing() + eta * times.step + kSolverTolerance);
    table.add({eta, c.data_eta_factor * eta, boundary.norm, initial.norm, budget});
    const std::string tag = "eta=" + label(eta);
    ctx.check(tag + " boundary residual within budget", boundary.norm < budget, brief(boundary.norm) + " vs " + brief(budget));
    ctx.check(tag + " initial residual within budget", initial.norm < budget, brief(initial.norm) + " vs " + brief(budget));
    norms.push_back(boundary.norm);
    if (k == 0) {
      write_csv(boundary.residual, c.output / "boundary_residual.csv");
      ctx.result.files.push_back(c.output / "boundary_residual.csv");
    }
  }
  ctx.emit(table, "trace_check");
  nlohmann::json ratios = nlohmann::json::array();
  for (std::size_t k = 1; k < norms.size(); ++k) ratios.push_back(norms[k] / norms[k - 1]);
  ctx.result.summary["boundary_halving_ratios"] = ratios;
}

RelabelFunction relabel_by_name(const std::string& name, double p) {
  if (name == "tanh") return tanh_relabel();
  if (name == "identity") return identity_relabel();
  double cap = 0.0;
  double eta_r = 0.0;
  char close = 0;
  if (std::sscanf(name.c_str(), "truncation(%lf ,%lf %c", &cap, &eta_r, &close) == 3 && close == ')')
    return truncation_relabel(cap, eta_r, p);
  fail(ErrorKind::lookup, "unknown relabeling '" + name + "'");
}

void weak_table(Context& ctx, const SampledField& u, const VelocityFieldSpec& b, const SpaceTimeFunction& h,
                const SpaceTimeFunction& u0, double scale, const std::string& stem, const std::string& property) {
  const auto& g = ctx.config.grid;
  require(g.dimension == 2, ErrorKind::dimension, "the test-function corpus is two-dimensional");
  const double dx = g.spacing;
  const double dt = g.dt();
  Table table(property, {"test_function", "residual", "error_estimate", "c1_norm", "budget"});
  for (const auto& phi : front_test_functions(g.half_width, g.depth, g.horizon)) {
    const auto r = weak_residual(u, b, h, u0, phi);
    const double budget = 10.0 * (dx * dx + dt * dt) * phi.c1_norm() * scale;
    table.add({phi.id(), r.value, r.error_estimate, r.c1_norm, budget});
    ctx.check(phi.id() + " |R| within budget", std::abs(r.value) < budget, brief(std::abs(r.value)) + " vs " + brief(budget));
  }
  ctx.emit(table, stem);
}

void solve(Context& ctx) {
  const auto& c = ctx.config;
  const auto b = ctx.field();
  const auto h = ctx.boundary();
  const auto u0 = ctx.initial();
  const auto u = solve_characteristics(b, h, u0, c.strip(), c.times());
  write_binary(u, c.output / "solution.hmf");
  write_csv(u, c.output / "solution.csv");
  ctx.result.files.push_back(c.output / "solution.hmf");
  ctx.result.files.push_back(c.output / "solution.csv");
  weak_table(ctx, u, b, h, u0, 1.0, "weak_residual", "classical solution from backward characteristics satisfies the weak formulation");
}

void renormalize_experiment(Context& ctx) {
  const auto& c = ctx.config;
  const auto b = ctx.field();
  const auto h = ctx.boundary();
  const auto u0 = ctx.initial();
  const auto theta = relabel_by_name(c.relabel, c.p);
  const auto u = solve_characteristics(b, h, u0, c.strip(), c.times());
  const auto relabeled = renormalize(u, theta);
  write_binary(relabeled, c.output / "relabeled.hmf");
  ctx.result.files.push_back(c.output / "relabeled.hmf");
  const SpaceTimeFunction th = [&](std::span<const double> x, double t) { return theta(h(x, t)); };
  const SpaceTimeFunction tu0 = [&](std::span<const double> x, double t) { return theta(u0(x, t)); };
  ctx.result.summary["relabel"] = theta.name();
  ctx.result.summary["derivative_bound"] = theta.derivative_bound();
  weak_table(ctx, relabeled, b, th, tu0, theta.derivative_bound(), "renormalize",
             "relabeled solution theta(u) satisfies the weak formulation with data theta(h), theta(u0)");
}

void uniqueness(Context& ctx) {
  const auto& c = ctx.config;
  ScalarDataSpec data{ctx.initial(), ctx.boundary(), c.p, 0.0};
  const SpaceTimeFunction bump = [](std::span<const double>, double) { return 1.0; };
  const auto report = uniqueness_experiment(ctx.field(), data, c.etas, c.strip(), c.times(), bump);
  Table table("solutions for mollified data form a Cauchy sequence in L^p as eta decreases",
              {"eta", "next_eta", "difference", "ratio"});
  for (std::size_t k = 0; k < report.differences.size(); ++k) {
    const double ratio = k + 1 < report.differences.size() ? report.differences[k] / report.differences[k + 1]
                                                            : std::numeric_limits<double>::quiet_NaN();
    table.add({c.etas[k], c.etas[k + 1], report.differences[k], ratio});
    if (k + 1 < report.differences.size())
      ctx.check("difference shrinks x1.5 after eta=" + label(c.etas[k + 1]), ratio >= 1.5, brief(ratio));
  }
  ctx.emit(table, "uniqueness");
  Table outflow("changing h on the outflow part of the boundary leaves the solution unchanged",
                {"eta", "max_difference", "changed_nodes"});
  outflow.add({c.etas.back(), report.outflow_max_difference, static_cast<double>(report.outflow_changed_nodes)});
  ctx.emit(outflow, "uniqueness_outflow");
  std::vector<std::string> columns{"time"};
  for (std::size_t k = 0; k < report.differences.size(); ++k) columns.push_back("diff_" + std::to_string(k));
  Table slices("per-time-slice L^p differences between consecutive eta levels", columns);
  for (std::size_t n = 0; n < report.times.size(); ++n) {
    std::vector<Table::Cell> row{report.times[n]};
    for (const auto& s : report.slice_differences) row.emplace_back(s[n]);
    slices.add(std::move(row));
  }
  ctx.emit(slices, "uniqueness_slices");
  ctx.check("outflow perturbation changes no node", report.outflow_changed_nodes == 0,
            std::to_string(report.outflow_changed_nodes) + " nodes");
  ctx.check("outflow max difference <= solver tolerance", report.outflow_max_difference <= kSolverTolerance,
            brief(report.outflow_max_difference));
}

void gronwall(Context& ctx) {
  const auto& c = ctx.config;
  const auto b = ctx.field();
  const auto md = mollify_data(b, ScalarDataSpec{ctx.initial(), ctx.boundary(), c.p, 0.0},
                               c.data_eta_factor * c.etas.front(), std::nullopt, ctx.options());
  const auto u = solve_characteristics(md.velocity, md.boundary, md.initial, c.strip(), c.times());
  const auto report = gronwall_check(u, md.velocity, md.boundary, c.p);
  Table table("energy ||u(t)||_p^p stays below (||u(0)||_p^p + M2 t) exp(M1 t)", {"time", "energy", "bound"});
  for (const auto& row : report.rows) table.add({row.time, row.energy, row.bound});
  ctx.emit(table, "gronwall");
  ctx.result.summary["m1"] = report.m1;
  ctx.result.summary["m2"] = report.m2;
  ctx.result.summary["repair_factor"] = report.repair_factor();
  ctx.check("bound holds with 5% slack", report.holds(1.05), "repair factor " + brief(report.repair_factor()));
}

void mollifier_defect(Context& ctx) {
  const auto& c = ctx.config;
  const auto u = SampledField::sample(c.strip(), std::nullopt, ctx.initial());
  const std::vector<double> origin{0.0};
  Table table("standard mollification halves the boundary value of u = 1, the one-sided kernel keeps it",
              {"kernel", "eta", "value"});
  for (double eta : c.etas) {
    const double standard = convolve_standard(u, eta, origin);
    const double tailored = convolve_half_space(u, HalfSpaceKernel(1, eta), origin);
    table.add({std::string("standard"), eta, standard});
    table.add({std::string("tailored"), eta, tailored});
    if (c.initial == "one") {
      const std::string tag = "eta=" + label(eta);
      ctx.check(tag + " standard = 0.5 +- 1e-3", std::abs(standard - 0.5) <= 1e-3, format_number(standard));
      ctx.check(tag + " tailored = 1 +- 1e-8", std::abs(tailored - 1.0) <= 1e-8, format_number(tailored));
    }
  }
  ctx.emit(table, "mollifier_defect");
}

void curved_trace(Context& ctx) {
  const auto& c = ctx.config;
  const auto domain = c.domain.kind == "disk" ? SmoothDomain2D::disk(c.domain.radius)
                                              : SmoothDomain2D::annulus(c.domain.inner, c.domain.outer);
  const auto b = radial_inflow();
  const auto h = ctx.boundary();
  const auto times = c.times();
  const auto u = solve_curved(b, domain, c.strip(), times, h, ctx.initial());
  Table table("curved-boundary trace through tubular coordinates matches the mollified inflow flux",
              {"eta", "l1_norm", "budget"});
  for (std::size_t k = 0; k < c.etas.size(); ++k) {
    const double eta = c.etas[k];
    const auto report = curved_trace_residual(u, b, h, eta, domain, ctx.options());
    const double budget = c.grid.spacing * c.grid.spacing + eta * times.step + kSolverTolerance;
    table.add({eta, report.l1_norm, budget});
    ctx.check("eta=" + label(eta) + " residual within budget", report.l1_norm < budget,
              brief(report.l1_norm) + " vs " + brief(budget));
    if (k == 0) {
      Table detail("curved trace residual by component, time and arc length", {"component", "time", "arc", "residual"});
      std::size_t i = 0;
      for (std::size_t comp = 0; comp < report.arcs.size(); ++comp)
        for (std::size_t n = 0; n < report.times.count; ++n)
          for (std::size_t a = 0; a < report.arcs[comp].count; ++a)
            detail.add({static_cast<double>(comp), report.times.node(n), report.arcs[comp].node(a), report.residual[i++]});
      ctx.emit(detail, "curved_trace_residual");
    }
  }
  ctx.emit(table, "curved_trace");
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  static const std::map<std::string, std::function<void(Context&)>> runners{
      {"converge-commutator", converge_commutator},
      {"interchange", interchange},
      {"trace-check", trace_check},
      {"solve", solve},
      {"renormalize", renormalize_experiment},
      {"uniqueness", uniqueness},
      {"gronwall", gronwall},
      {"mollifier-defect", mollifier_defect},
      {"curved-trace", curved_trace},
  };
  const auto it = runners.find(config.experiment);
  require(it != runners.end(), ErrorKind::lookup, "unknown experiment '" + config.experiment + "'");
  fs::create_directories(config.output);
  Context ctx{config, {}};
  it->second(ctx);
  return std::move(ctx.result);
}

}  // namespace halfmoll::cli
