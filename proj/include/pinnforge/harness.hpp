#pragma once

// Experiment runner: configuration, evaluation against the reference
// solution, the Courant-number study and the artifacts behind the figures.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pinnforge/network.hpp"
#include "pinnforge/oracles.hpp"
#include "pinnforge/problems.hpp"
#include "pinnforge/training.hpp"

namespace pinnforge {

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::transport1d;
  /// Grid the observations are drawn from and, unless `eval_grid` is set,
  /// the error is evaluated on.
  GridSpec grid;
  /// Coarser evaluation grid over the same ranges.
  std::optional<GridSpec> eval_grid;
  std::size_t observation_count = 0;
  std::uint64_t observation_seed = 1;
  NetworkSpec network;
  /// Starting value of each model parameter, in problem order.
  std::vector<double> param_init;
  std::uint64_t init_seed = 7;
  TrainConfig train;
  OracleSettings oracle;
  std::filesystem::path out_dir = "out";

  const GridSpec& evaluation_grid() const { return eval_grid ? *eval_grid : grid; }
  /// Throws ConfigError when fields disagree with the problem.
  void validate() const;
};

/// Defaults of each benchmark: grid and observation count, architecture,
/// activations and learning rate, every parameter starting at 1.0.
ExperimentConfig default_config(ProblemKind kind);

/// JSON mirroring the field names of ExperimentConfig.
std::string config_to_json(const ExperimentConfig& cfg);
/// Parses a config, or a run summary carrying one under "config". Missing
/// fields keep the defaults of the named problem.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

struct ParamEstimate {
  std::string name;
  double estimate = 0.0;
  double truth = 0.0;
  double rel_error = 0.0;

  friend bool operator==(const ParamEstimate&, const ParamEstimate&) = default;
};

/// Network against reference on an evaluation grid, over the observed outputs.
struct ErrorReport {
  GridSpec grid;
  std::vector<std::string> output_names;
  Eigen::MatrixXd points;   // input_dim x n
  Eigen::MatrixXd network;  // outputs x n
  Eigen::MatrixXd exact;    // outputs x n
  double max_abs = 0.0;
  double rms = 0.0;
  std::vector<ParamEstimate> params;

  double abs_error(Eigen::Index output, Eigen::Index k) const { return std::abs(network(output, k) - exact(output, k)); }
  /// Largest relative parameter error.
  double max_param_rel_error() const;
  friend bool operator==(const ErrorReport& a, const ErrorReport& b);
};

ErrorReport evaluate(const ProblemSpec& spec, const MlpParams& params, const Oracle& oracle, const GridSpec& grid);

struct ExperimentResult {
  ExperimentConfig config;
  ProblemSpec spec;
  ObservationSet observations;
  TrainResult training;
  ErrorReport report;
  double seconds = 0.0;

  bool aborted() const { return training.abort_reason.has_value(); }
};

/// Observations, initial network, training and evaluation. A training abort
/// is reported through `training.abort_reason`, not thrown.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes solution.csv, error_grid.csv, loss.csv, params.csv, trace.csv,
/// observations.csv, checkpoint.json and summary.json into `dir`.
void emit_figure_data(const ExperimentResult& result, const std::filesystem::path& dir);

/// Transport collocation grid whose spacing ratio gives a * dt / dx ~ courant
/// at the true speed, with the spatial resolution of `base`.
GridSpec courant_grid(const ProblemSpec& spec, const GridSpec& base, double courant);
double courant_number(const ProblemSpec& spec, const GridSpec& grid);

struct CflCase {
  double requested = 0.0;
  double achieved = 0.0;
  GridSpec grid;
  ExperimentResult result;
};

/// Retrains the transport experiment with collocation sampling and error
/// evaluation on the grid of each Courant number.
std::vector<CflCase> cfl_study(const ExperimentConfig& base, const std::vector<double>& courant_numbers);
void write_cfl_csv(const std::vector<CflCase>& cases, const std::filesystem::path& path);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast invariant suite: jets and loss gradients against central differences,
/// reference-solution residuals, RK4 order and first-integral drift.
std::vector<CheckResult> run_checks();

}  // namespace pinnforge
