#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "halfmoll/grid.hpp"
#include "toml.hpp"

namespace halfmoll::cli {

inline const std::vector<std::string> kExperiments{
    "converge-commutator", "interchange", "trace-check",      "solve",        "renormalize",
    "uniqueness",          "gronwall",    "mollifier-defect", "curved-trace",
};

struct GridConfig {
  int dimension = 2;
  double half_width = 0.5;  // A; the half-extent of the box for curved domains
  double depth = 1.0;       // L
  double spacing = 1.0 / 64;
  double horizon = 0.5;                // T
  std::optional<double> time_step;     // defaults to the spacing
  double dt() const { return time_step.value_or(spacing); }
};

struct DomainConfig {
  std::string kind = "strip";  // strip, disk, annulus
  double radius = 1.0;
  double inner = 0.5;
  double outer = 1.0;
};

struct ExperimentConfig {
  std::string experiment;
  std::string field;
  std::string initial = "zero";
  std::string boundary = "zero";
  double p = 2.0;
  double beta = 2.0;
  std::vector<double> etas;
  double data_eta_factor = 0.25;  // data are mollified at factor * eta
  std::string relabel = "tanh";
  int points_per_width = 16;
  GridConfig grid;
  DomainConfig domain;
  std::filesystem::path output = "halfmoll-out";
  std::uint64_t seed = 20240611;

  StripGrid strip() const;
  Axis times() const;
  nlohmann::json to_json() const;
};

ExperimentConfig defaults_for(std::string_view experiment);

// Overlays a parsed TOML document; unknown keys and wrong types are errors.
void apply(ExperimentConfig& config, const nlohmann::json& document);

// Checks every downstream constraint before any computation; throws
// ConfigError naming the violated one.
void validate(const ExperimentConfig& config);

}  // namespace halfmoll::cli
