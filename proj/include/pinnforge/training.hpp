#pragma once

// Loss assembly and optimization.
//
// Per step: draw collocation minibatches, evaluate
//   ge  = mean over interior points of |residual|^2
//   ic  = mean over t = 0 points of |u - f|^2
//   bc  = mean over boundary points of |u - g|^2
//   obs = mean over observations of |u - u_obs|^2      (inverse mode only)
// and take one Adam step on the weights, biases and (in inverse mode) the
// model parameters.
//
// The network is evaluated with `BatchPass`; the loss head on top of the
// network outputs is recorded on an `ad::Tape`, whose adjoints are then fed
// back through `BatchPass::backward`.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pinnforge/autodiff/jet.hpp"
#include "pinnforge/network.hpp"
#include "pinnforge/oracles.hpp"
#include "pinnforge/problems.hpp"

namespace pinnforge {

enum class Mode { forward, inverse };

std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view name);

struct LossBreakdown {
  double ge = 0.0;
  double ic = 0.0;
  double bc = 0.0;
  double obs = 0.0;
  double total = 0.0;

  /// Loss_GE + Loss_IC + Loss_BC.
  double forward() const { return ge + ic + bc; }
  friend bool operator==(const LossBreakdown&, const LossBreakdown&) = default;
};

struct TrainConfig {
  std::size_t epochs = 50000;
  double lr = 1e-5;
  /// Adam step size for the model parameters p.
  double param_lr = 1e-3;
  std::size_t batch_interior = 128;
  std::size_t batch_initial = 64;
  std::size_t batch_boundary = 64;
  Mode mode = Mode::inverse;
  std::uint64_t seed = 0;
  /// Fixed-order reductions. Evaluation is single-threaded, so this always holds;
  /// the flag is kept so configs state the contract explicitly.
  bool determinism = true;
  /// Draw the collocation batches once and reuse them every epoch.
  bool fixed_batches = false;
  std::size_t trace_every = 100;
  /// Stop once the total loss falls below this value.
  std::optional<double> stop_loss;
  double divergence_limit = 1e6;
  /// Sample collocation points from this grid instead of the continuous domain.
  std::optional<GridSpec> collocation_grid;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

/// Collocation points, each input_dim x n.
struct Batches {
  Eigen::MatrixXd interior;
  Eigen::MatrixXd initial;
  Eigen::MatrixXd boundary;
};

/// interior ~ U((0,T] x Omega), initial ~ U({0} x Omega), boundary ~
/// U((0,T] x dOmega) with faces weighted by measure. The ODE has a single
/// initial point and no boundary batch.
Batches sample_batches(const ProblemSpec& spec, const TrainConfig& cfg, std::mt19937_64& rng);

/// Per-sample network outputs: outputs[s][o].
template <class T>
using SampleJets = std::vector<std::vector<ad::Jet<T>>>;
template <class T>
using SampleValues = std::vector<std::vector<T>>;

/// Mean over samples of the squared residual components.
template <class T>
T loss_ge(const ProblemSpec& spec, const SampleJets<T>& outputs, std::span<const T> p) {
  if (outputs.empty()) throw ContractViolation("loss_ge: empty interior batch");
  T sum(0.0);
  for (const auto& sample : outputs) {
    for (const auto& r : residual<T>(spec, sample, p)) sum += r * r;
  }
  return sum / T(static_cast<double>(outputs.size()));
}

/// Mean over samples of sum_o (outputs[s][o] - targets[s][o])^2.
template <class T>
T mean_squared(const SampleValues<T>& outputs, const std::vector<std::vector<double>>& targets) {
  if (outputs.size() != targets.size()) throw ContractViolation("mean_squared: batch and targets differ in size");
  if (outputs.empty()) return T(0.0);
  T sum(0.0);
  for (std::size_t s = 0; s < outputs.size(); ++s) {
    if (outputs[s].size() != targets[s].size()) throw ContractViolation("mean_squared: output width mismatch");
    for (std::size_t o = 0; o < outputs[s].size(); ++o) {
      const T diff = outputs[s][o] - T(targets[s][o]);
      sum += diff * diff;
    }
  }
  return sum / T(static_cast<double>(outputs.size()));
}

/// Initial-condition targets f for each column of `initial` (t = 0 points).
std::vector<std::vector<double>> initial_targets(const ProblemSpec& spec, const Eigen::MatrixXd& initial);
/// Boundary targets g for each column of `boundary`.
std::vector<std::vector<double>> boundary_targets(const ProblemSpec& spec, const Eigen::MatrixXd& boundary);
/// Observed values per observation, as rows of `targets`.
std::vector<std::vector<double>> observation_targets(const ObservationSet& obs);

/// Picks rows `outputs` of a value matrix (outputs x B) into per-sample form.
SampleValues<double> select_values(const Eigen::MatrixXd& value, const std::vector<std::size_t>& outputs);
SampleJets<double> to_sample_jets(const BatchJets& jets);

// Network-level losses.
double loss_ge(const ProblemSpec& spec, const MlpParams& params, const Eigen::MatrixXd& interior);
double loss_ic(const ProblemSpec& spec, const MlpParams& params, const Eigen::MatrixXd& initial);
double loss_bc(const ProblemSpec& spec, const MlpParams& params, const Eigen::MatrixXd& boundary);
double loss_obs(const ProblemSpec& spec, const MlpParams& params, const ObservationSet& obs);

/// d(total)/d(theta) and d(total)/d(p).
struct LossGradient {
  Eigen::VectorXd theta;
  Eigen::VectorXd model;
};

/// Forward mode: total = ge + ic + bc, p frozen, obs reported as 0.
/// Inverse mode: total adds obs and p is differentiable. When `grad` is
/// given it receives the gradient of the total.
LossBreakdown loss_total(const ProblemSpec& spec, const MlpParams& params, const Batches& batches,
                         const ObservationSet* obs, Mode mode, LossGradient* grad = nullptr);

struct AdamState {
  Eigen::VectorXd m1;
  Eigen::VectorXd m2;
  Eigen::VectorXd model_m1;
  Eigen::VectorXd model_m2;
  std::size_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_params(const MlpParams& params, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
};

/// Bias-corrected Adam update. Model parameters move only when
/// `update_model`; their moments are left untouched otherwise.
/// Throws NumericError naming the first non-finite gradient entry.
void adam_step(AdamState& state, MlpParams& params, const LossGradient& grad, double lr, double param_lr,
               bool update_model);

struct TraceRecord {
  std::size_t epoch = 0;
  LossBreakdown loss;
  std::vector<double> model_params;
  double seconds = 0.0;
};

struct TrainingTrace {
  std::vector<std::string> param_names;
  std::vector<TraceRecord> records;
};

/// CSV `epoch,loss_ge,loss_ic,loss_bc,loss_obs,loss_total,p_1..p_k,seconds`.
void write_trace_csv(const TrainingTrace& trace, const std::filesystem::path& path);

struct TrainResult {
  MlpParams params;
  TrainingTrace trace;
  std::size_t epochs_run = 0;
  /// Set when training stopped on divergence or a non-finite gradient.
  std::optional<std::string> abort_reason;
};

/// Runs `cfg.epochs` iterations of sample -> loss_total -> gradient -> Adam.
/// Epoch e's record holds the loss at the start of that epoch and the model
/// parameters that produced it; records are kept every `trace_every`
/// epochs and for the last epoch run.
TrainResult train(const ProblemSpec& spec, MlpParams params, const TrainConfig& cfg, const ObservationSet* obs);

}  // namespace pinnforge
