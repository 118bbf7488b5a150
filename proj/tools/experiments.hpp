#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"

namespace halfmoll::cli {

struct Check {
  std::string name;
  bool ok = true;
  std::string detail;
};

struct RunResult {
  std::vector<Check> checks;
  std::vector<std::filesystem::path> files;
  nlohmann::json summary = nlohmann::json::object();

  bool passed() const;
};

// Fixed column order; numbers are written with 17 significant digits so the
// same config and seed give byte-identical files.
class Table {
 public:
  using Cell = std::variant<double, std::string>;

  Table(std::string property, std::vector<std::string> columns);
  void add(std::vector<Cell> row);
  // <stem>.csv with a "# property:" comment, and <stem>.dat for gnuplot.
  std::vector<std::filesystem::path> write(const std::filesystem::path& dir, const std::string& stem) const;

 private:
  std::string property_;
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

// Runs config.experiment (already validated) and writes its artifacts into
// config.output.
RunResult run_experiment(const ExperimentConfig& config);

}  // namespace halfmoll::cli
