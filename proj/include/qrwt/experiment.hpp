// Configuration files, experiment runners and report emission for the qrwt
// command-line tool.
//
// Configs are JSON.  Complex numbers are [re, im] pairs or plain reals,
// matrices are row-major nested lists, block partitions are lists of 1-based
// index lists, and step-function values are coordinates in the noise basis.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qrwt/cocycle.hpp"
#include "qrwt/presets.hpp"

namespace qrwt {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepConfig {
  std::vector<double> breakpoints{0.0};
  std::vector<Vector> coords;
};

struct GeneratorConfig {
  /// "none", "zero", "raw", "explicit" or "hamiltonian".
  std::string type = "none";
  GeneratorKind walk = GeneratorKind::RightMultiplication;
  Matrix f;                     // raw
  std::vector<Matrix> images;   // explicit: Psi(e_pq), p-major order
  std::optional<HamiltonianSpec> spec;
  std::optional<std::uint64_t> random_seed;
  bool random_perturbation = false;
  double random_scale = 0.5;
};

struct Tolerances {
  double identity = 1e-11;
  double certify = 1e-10;
  double min_slope = 0.4;
  double flat = 1e-12;
  double choi = -1e-8;
};

struct C3Config {
  double lambda1 = 0.7;
  std::optional<C3Example> parameters;
};

struct ExperimentConfig {
  Index system_dim = 2;
  std::optional<Matrix> rho;
  double support_tol = kDefaultSupportTol;
  std::optional<BlockPartition> blocks;  // 0-based after parsing
  GeneratorConfig generator;
  std::optional<StepConfig> f;
  std::optional<StepConfig> g;
  std::optional<Matrix> observable;
  std::optional<Vector> u;
  std::optional<Vector> v;
  std::vector<double> taus;
  std::vector<double> times{1.0};
  std::uint64_t seed = 1;
  int trials = 8;
  Tolerances tol;
  C3Config c3;
};

/// Throws ConfigError with the offending field path.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

struct CsvRow {
  double tau = 0.0;
  double t = 0.0;
  Complex value;
  double abs_err = 0.0;
};

struct RunReport {
  std::string command;
  bool passed = true;
  nlohmann::ordered_json summary;
  std::vector<CsvRow> table;
  std::vector<std::pair<std::string, double>> timings;  // seconds per stage
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

const std::vector<std::string>& subcommands();

/// Runs one subcommand.  Configuration problems surface as ConfigError.
RunReport run_experiment(const std::string& command, const ExperimentConfig& cfg,
                         const RunOptions& opts);

std::string format_json(const RunReport& report);
std::string format_csv(const RunReport& report);

/// Writes <dir>/<command>.json and, when there is a table, <dir>/<command>.csv.
void write_report(const RunReport& report, const std::filesystem::path& dir);

}  // namespace qrwt
