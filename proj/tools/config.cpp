#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "halfmoll/error.hpp"
#include "halfmoll/fields.hpp"
#include "halfmoll/relabel.hpp"

namespace halfmoll::cli {
namespace {

template <typename T>
T get(const nlohmann::json& node, const std::string& where) {
  try {
    return node.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + " has the wrong type");
  }
}

double number(const nlohmann::json& node, const std::string& where) {
  if (!node.is_number()) throw ConfigError(where + " must be a number");
  return node.get<double>();
}

void check_keys(const nlohmann::json& table, const std::string& where, const std::set<std::string>& allowed) {
  if (!table.is_object()) throw ConfigError(where + " must be a table");
  for (const auto& [key, value] : table.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

}  // namespace

StripGrid ExperimentConfig::strip() const {
  if (domain.kind == "strip") return {grid.dimension, grid.half_width, grid.depth, grid.spacing};
  const Axis axis = Axis::spanning(-grid.half_width, grid.half_width, grid.spacing);
  return StripGrid::box({axis, axis});
}

Axis ExperimentConfig::times() const { return time_axis(grid.horizon, grid.dt()); }

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["seed"] = seed;
  j["output"] = output.string();
  j["field"] = {{"name", field}};
  j["data"] = {{"initial", initial}, {"boundary", boundary}, {"p", p}, {"beta", beta}, {"relabel", relabel}};
  j["mollifier"] = {{"eta", etas}, {"data_eta_factor", data_eta_factor}, {"points_per_width", points_per_width}};
  j["grid"] = {{"dimension", grid.dimension}, {"half_width", grid.half_width}, {"depth", grid.depth},
               {"spacing", grid.spacing},     {"horizon", grid.horizon},       {"time_step", grid.dt()}};
  j["domain"] = {{"kind", domain.kind}, {"radius", domain.radius}, {"inner", domain.inner}, {"outer", domain.outer}};
  return j;
}

ExperimentConfig defaults_for(std::string_view experiment) {
  ExperimentConfig c;
  c.experiment = std::string(experiment);
  GridConfig& g = c.grid;
  if (experiment == "converge-commutator") {
    c.field = "rough_power(0.5)";
    c.initial = "gaussian(0.1, 0, 0.5)";
    c.etas = {0.2, 0.1, 0.05, 0.025};
    g = {2, 0.75, 1.5, 1.0 / 256, 0.0, std::nullopt};
  } else if (experiment == "interchange") {
    c.field = "rigid_rotation";
    c.initial = "gaussian(0.1, 0, 1)";
    c.etas = {0.125};
    g = {2, 1.25, 2.0, 1.0 / 16, 0.0, std::nullopt};
  } else if (experiment == "trace-check") {
    c.field = "constant";
    c.boundary = "one";
    c.etas = {1.0 / 16, 1.0 / 32};
    g = {2, 0.5, 0.25, 1.0 / 64, 0.25, std::nullopt};
  } else if (experiment == "solve" || experiment == "renormalize") {
    c.field = "constant";
    c.initial = "gaussian(0.08, 0, 0.5)";
    c.boundary = "one";
    g = {2, 0.5, 1.0, 1.0 / 64, 0.75, std::nullopt};
  } else if (experiment == "uniqueness") {
    c.field = "constant";
    c.initial = "gaussian(0.1, 0, 0.5)";
    c.boundary = "pulse";
    c.etas = {0.2, 0.1, 0.05, 0.025};
    g = {2, 1.0, 1.0, 1.0 / 32, 0.5, std::nullopt};
  } else if (experiment == "gronwall") {
    c.field = "vertical_inflow";
    c.initial = "gaussian(0.1, 0, 0.5)";
    c.etas = {1.0 / 16};
    c.data_eta_factor = 1.0;
    g = {2, 0.5, 1.0, 1.0 / 32, 0.5, std::nullopt};
  } else if (experiment == "mollifier-defect") {
    c.field = "constant";
    c.initial = "one";
    c.etas = {0.1, 0.01};
    g = {1, 0.0, 1.0, 1.0 / 1024, 0.0, std::nullopt};
  } else if (experiment == "curved-trace") {
    c.field = "radial_inflow";
    c.initial = "radial_step(0.5, 0.75)";
    c.boundary = "one";
    c.etas = {1.0 / 16};
    c.points_per_width = 8;
    c.domain.kind = "disk";
    g = {2, 1.125, 0.0, 1.0 / 64, 0.5, std::nullopt};
  } else {
    throw ConfigError("unknown experiment '" + std::string(experiment) + "'");
  }
  return c;
}

void apply(ExperimentConfig& c, const nlohmann::json& doc) {
  check_keys(doc, "config", {"experiment", "seed", "output", "field", "data", "mollifier", "grid", "domain"});
  if (doc.contains("experiment")) {
    const auto name = get<std::string>(doc["experiment"], "experiment");
    if (name != c.experiment) throw ConfigError("config is for '" + name + "', not '" + c.experiment + "'");
  }
  if (doc.contains("seed")) c.seed = get<std::uint64_t>(doc["seed"], "seed");
  if (doc.contains("output")) c.output = get<std::string>(doc["output"], "output");
  if (doc.contains("field")) {
    check_keys(doc["field"], "[field]", {"name"});
    if (doc["field"].contains("name")) c.field = get<std::string>(doc["field"]["name"], "field.name");
  }
  if (doc.contains("data")) {
    const auto& d = doc["data"];
    check_keys(d, "[data]", {"initial", "boundary", "p", "beta", "relabel"});
    if (d.contains("initial")) c.initial = get<std::string>(d["initial"], "data.initial");
    if (d.contains("boundary")) c.boundary = get<std::string>(d["boundary"], "data.boundary");
    if (d.contains("p")) c.p = number(d["p"], "data.p");
    if (d.contains("beta")) c.beta = number(d["beta"], "data.beta");
    if (d.contains("relabel")) c.relabel = get<std::string>(d["relabel"], "data.relabel");
  }
  if (doc.contains("mollifier")) {
    const auto& m = doc["mollifier"];
    check_keys(m, "[mollifier]", {"eta", "data_eta_factor", "points_per_width"});
    if (m.contains("eta")) {
      c.etas.clear();
      if (m["eta"].is_array()) {
        for (const auto& e : m["eta"]) c.etas.push_back(number(e, "mollifier.eta"));
      } else {
        c.etas.push_back(number(m["eta"], "mollifier.eta"));
      }
    }
    if (m.contains("data_eta_factor")) c.data_eta_factor = number(m["data_eta_factor"], "mollifier.data_eta_factor");
    if (m.contains("points_per_width")) c.points_per_width = get<int>(m["points_per_width"], "mollifier.points_per_width");
  }
  if (doc.contains("grid")) {
    const auto& g = doc["grid"];
    check_keys(g, "[grid]", {"dimension", "half_width", "depth", "spacing", "horizon", "time_step"});
    if (g.contains("dimension")) c.grid.dimension = get<int>(g["dimension"], "grid.dimension");
    if (g.contains("half_width")) c.grid.half_width = number(g["half_width"], "grid.half_width");
    if (g.contains("depth")) c.grid.depth = number(g["depth"], "grid.depth");
    if (g.contains("spacing")) c.grid.spacing = number(g["spacing"], "grid.spacing");
    if (g.contains("horizon")) c.grid.horizon = number(g["horizon"], "grid.horizon");
    if (g.contains("time_step")) c.grid.time_step = number(g["time_step"], "grid.time_step");
  }
  if (doc.contains("domain")) {
    const auto& d = doc["domain"];
    check_keys(d, "[domain]", {"kind", "radius", "inner", "outer"});
    if (d.contains("kind")) c.domain.kind = get<std::string>(d["kind"], "domain.kind");
    if (d.contains("radius")) c.domain.radius = number(d["radius"], "domain.radius");
    if (d.contains("inner")) c.domain.inner = number(d["inner"], "domain.inner");
    if (d.contains("outer")) c.domain.outer = number(d["outer"], "domain.outer");
  }
}

void validate(const ExperimentConfig& c) {
  const std::string& x = c.experiment;
  const GridConfig& g = c.grid;
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("constraint violated: " + what);
  };
  need(g.dimension >= 1 && g.dimension <= 3, "1 <= grid.dimension <= 3");
  need(g.spacing > 0.0 && std::isfinite(g.spacing), "grid.spacing > 0");
  need(g.dt() > 0.0 && std::isfinite(g.dt()), "grid.time_step > 0");
  need(c.p >= 1.0 && std::isfinite(c.p), "1 <= p < infinity");
  need(!c.etas.empty() || x == "solve" || x == "renormalize", "mollifier.eta is not empty");
  for (double eta : c.etas) need(eta > 0.0 && std::isfinite(eta), "every eta > 0");
  need(c.data_eta_factor > 0.0 && c.data_eta_factor <= 1.0, "0 < mollifier.data_eta_factor <= 1");
  need(c.points_per_width >= 2, "mollifier.points_per_width >= 2");
  need(c.domain.kind == "strip" || c.domain.kind == "disk" || c.domain.kind == "annulus",
       "domain.kind is strip, disk or annulus");
  need((x == "curved-trace") == (c.domain.kind != "strip"), "curved-trace runs on a disk or annulus, the rest on a strip");

  const bool uses_grid_quadrature = x == "converge-commutator" || x == "interchange" || x == "trace-check";
  if (uses_grid_quadrature)
    for (double eta : c.etas) need(eta >= 2.0 * g.spacing * (1.0 - 1e-12), "eta >= 2h for every eta");
  const bool timed = x == "trace-check" || x == "solve" || x == "renormalize" || x == "uniqueness" ||
                     x == "gronwall" || x == "curved-trace";
  if (timed) {
    need(g.horizon > 0.0, "grid.horizon > 0");
    need(std::abs(std::round(g.horizon / g.dt()) * g.dt() - g.horizon) <= 1e-12 * g.horizon,
         "grid.horizon is a multiple of grid.time_step");
  }
  if (x == "trace-check" || x == "curved-trace")
    for (double eta : c.etas) need(eta < g.horizon, "t + eta <= T leaves at least one time (eta < horizon)");
  if (x == "trace-check")
    for (double eta : c.etas) need(eta <= g.depth, "eta <= grid.depth");
  if (x == "converge-commutator") {
    try {
      (void)exponent_check(c.p, c.beta);
    } catch (const Error& e) {
      throw ConfigError(std::string("constraint violated: beta >= p' (") + e.what() + ")");
    }
  }
  if (x == "uniqueness") need(c.etas.size() >= 2, "uniqueness needs at least two etas");
  if (x == "mollifier-defect") need(g.dimension == 1, "mollifier-defect runs on the half-line (dimension 1)");
  if (x == "curved-trace") {
    need(c.field == "radial_inflow", "curved-trace uses field radial_inflow");
    need(g.dimension == 2, "curved domains are two-dimensional");
    const double outer = c.domain.kind == "disk" ? c.domain.radius : c.domain.outer;
    need(g.half_width > outer, "grid.half_width exceeds the domain radius");
    need(c.domain.kind != "annulus" || (0.0 < c.domain.inner && c.domain.inner < c.domain.outer),
         "0 < domain.inner < domain.outer");
  }

  // Names must resolve.
  try {
    if (x != "curved-trace") (void)builtin_field(c.field, g.dimension);
    (void)builtin_scalar(c.initial, g.dimension);
    (void)builtin_scalar(c.boundary, g.dimension);
  } catch (const Error& e) {
    throw ConfigError(std::string("constraint violated: ") + e.what());
  }
  if (x == "renormalize") {
    need(c.relabel == "tanh" || c.relabel == "identity" || c.relabel.rfind("truncation(", 0) == 0,
         "data.relabel is tanh, identity or truncation(M, eta_r)");
  }
  try {
    (void)c.strip();
    if (timed) (void)c.times();
  } catch (const Error& e) {
    throw ConfigError(std::string("constraint violated: ") + e.what());
  }
}

}  // namespace halfmoll::cli
