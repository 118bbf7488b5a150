// halfmoll: runs one experiment, writes CSV/.dat artifacts and manifest.json.
// Exit codes: 0 ok, 1 failed assertion (with --assert), 2 config or input error.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "experiments.hpp"
#include "halfmoll/error.hpp"
#include "halfmoll/parallel.hpp"
#include "halfmoll/transport.hpp"

namespace cli = halfmoll::cli;

namespace {

struct Overrides {
  std::string config_file;
  std::vector<double> etas;
  std::optional<double> grid_h;
  std::optional<std::string> field;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool assert_checks = false;
};

const char* describe(const std::string& name) {
  if (name == "converge-commutator") return "commutator norm over a list of eta";
  if (name == "interchange") return "commutator pairing identities at h and h/2";
  if (name == "trace-check") return "boundary and initial trace residuals of a solved problem";
  if (name == "solve") return "classical solution by backward characteristics plus weak residuals";
  if (name == "renormalize") return "weak residual of theta(u) against relabeled data";
  if (name == "uniqueness") return "differences between mollified-data solutions and an outflow perturbation";
  if (name == "gronwall") return "energy against the integrated growth bound";
  if (name == "mollifier-defect") return "standard versus one-sided mollification of u = 1 at the boundary";
  if (name == "curved-trace") return "trace residual on a disk or annulus through tubular coordinates";
  return "";
}

cli::ExperimentConfig build_config(const std::string& experiment, const Overrides& o) {
  auto config = cli::defaults_for(experiment);
  if (!o.config_file.empty()) cli::apply(config, cli::parse_toml_file(o.config_file));
  if (!o.etas.empty()) config.etas = o.etas;
  if (o.grid_h) config.grid.spacing = *o.grid_h;
  if (o.field) config.field = *o.field;
  if (o.out) config.output = *o.out;
  if (o.seed) config.seed = *o.seed;
  cli::validate(config);
  return config;
}

void write_manifest(const cli::ExperimentConfig& config, const cli::RunResult& result, double seconds,
                    bool asserted) {
  nlohmann::json m;
  m["experiment"] = config.experiment;
  m["config"] = config.to_json();
  m["versions"] = {{"halfmoll", HALFMOLL_VERSION}, {"compiler", __VERSION__}, {"cxx_standard", __cplusplus}};
  m["threads"] = halfmoll::worker_count();
  m["wallclock_s"] = seconds;
  m["tolerances"] = {{"solver", halfmoll::kSolverTolerance}};
  m["summary"] = result.summary;
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : result.files) files.push_back(f.filename().string());
  m["files"] = files;
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : result.checks) checks.push_back({{"name", c.name}, {"ok", c.ok}, {"detail", c.detail}});
  m["checks"] = checks;
  m["asserted"] = asserted;
  m["passed"] = result.passed();
  std::ofstream(config.output / "manifest.json") << m.dump(2) << '\n';
}

int run(const std::string& experiment, const Overrides& o) {
  try {
    const auto config = build_config(experiment, o);
    const auto start = std::chrono::steady_clock::now();
    const auto result = cli::run_experiment(config);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(config, result, seconds, o.assert_checks);
    for (const auto& c : result.checks)
      std::printf("[%s] %s: %s\n", c.ok ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    std::printf("%s: %zu files in %s (%.1f s)\n", experiment.c_str(), result.files.size() + 1,
                config.output.string().c_str(), seconds);
    return o.assert_checks && !result.passed() ? 1 : 0;
  } catch (const cli::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
  } catch (const halfmoll::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiments with one-sided mollifiers for transport equations with inflow data"};
  app.require_subcommand(1);
  Overrides overrides;
  std::string chosen;
  for (const std::string& name : cli::kExperiments) {
    CLI::App* sub = app.add_subcommand(name, describe(name));
    sub->add_option("--config", overrides.config_file, "TOML experiment config")->check(CLI::ExistingFile);
    sub->add_option("--eta", overrides.etas, "mollifier scales (comma separated)")->delimiter(',');
    sub->add_option("--grid-h", overrides.grid_h, "grid spacing");
    sub->add_option("--field", overrides.field, "velocity field, e.g. rough_power(0.5)");
    sub->add_option("--out", overrides.out, "output directory");
    sub->add_option("--seed", overrides.seed, "seed for randomized checks");
    sub->add_flag("--assert", overrides.assert_checks, "exit 1 when a check fails");
    sub->callback([&chosen, name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return run(chosen, overrides);
}
