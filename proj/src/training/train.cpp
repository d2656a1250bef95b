#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "pinnforge/error.hpp"
#include "pinnforge/training.hpp"

namespace pinnforge {

using Eigen::Index;

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(param_lr > 0.0)) throw ConfigError("model-parameter learning rate must be positive");
  if (batch_interior == 0 || batch_initial == 0 || batch_boundary == 0) throw ConfigError("batch sizes must be >= 1");
  if (trace_every == 0) throw ConfigError("trace_every must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) throw ConfigError("Adam epsilon must be positive");
}

namespace {

// Uniform on (0, T].
double sample_time(double t_end, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return t_end * (1.0 - unit(rng));
}

}  // namespace

Batches sample_batches(const ProblemSpec& spec, const TrainConfig& cfg, std::mt19937_64& rng) {
  const auto dim = static_cast<Index>(spec.input_dim());
  const auto n_space = spec.spatial_dim();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Batches b;

  std::vector<std::vector<double>> axes;
  if (cfg.collocation_grid) {
    for (std::size_t a = 0; a < spec.input_dim(); ++a) axes.push_back(grid_axis(spec, *cfg.collocation_grid, a));
  }
  const auto pick = [&](std::size_t axis) {
    const auto& values = axes[axis];
    return values[std::uniform_int_distribution<std::size_t>(0, values.size() - 1)(rng)];
  };
  const auto space_coord = [&](std::size_t d) {
    if (!axes.empty()) return pick(d + 1);
    return spec.space[d].lo + spec.space[d].length() * unit(rng);
  };
  const auto time_coord = [&] { return axes.empty() ? sample_time(spec.t_end, rng) : pick(0); };

  b.interior.resize(dim, static_cast<Index>(cfg.batch_interior));
  for (Index s = 0; s < b.interior.cols(); ++s) {
    b.interior(0, s) = time_coord();
    for (std::size_t d = 0; d < n_space; ++d) b.interior(static_cast<Index>(d + 1), s) = space_coord(d);
  }

  if (n_space == 0) {
    b.initial = Eigen::MatrixXd::Zero(1, 1);
    b.boundary.resize(1, 0);
    return b;
  }

  b.initial.resize(dim, static_cast<Index>(cfg.batch_initial));
  for (Index s = 0; s < b.initial.cols(); ++s) {
    b.initial(0, s) = 0.0;
    for (std::size_t d = 0; d < n_space; ++d) b.initial(static_cast<Index>(d + 1), s) = space_coord(d);
  }

  const auto faces = boundary_faces(spec);
  if (faces.empty()) {
    b.boundary.resize(dim, 0);
    return b;
  }
  std::vector<double> measure;
  for (const auto& [axis, side] : faces) {
    double m = 1.0;
    for (std::size_t d = 0; d < n_space; ++d) {
      if (d != axis) m *= spec.space[d].length();
    }
    measure.push_back(m);
  }
  std::discrete_distribution<std::size_t> face_pick(measure.begin(), measure.end());
  b.boundary.resize(dim, static_cast<Index>(cfg.batch_boundary));
  for (Index s = 0; s < b.boundary.cols(); ++s) {
    const auto [axis, side] = faces[face_pick(rng)];
    b.boundary(0, s) = time_coord();
    for (std::size_t d = 0; d < n_space; ++d) {
      const double wall = side == 0 ? spec.space[d].lo : spec.space[d].hi;
      b.boundary(static_cast<Index>(d + 1), s) = d == axis ? wall : space_coord(d);
    }
  }
  return b;
}

AdamState AdamState::for_params(const MlpParams& params, double beta1, double beta2, double eps) {
  AdamState s;
  s.m1 = Eigen::VectorXd::Zero(params.theta().size());
  s.m2 = Eigen::VectorXd::Zero(params.theta().size());
  s.model_m1 = Eigen::VectorXd::Zero(static_cast<Index>(params.model().size()));
  s.model_m2 = Eigen::VectorXd::Zero(static_cast<Index>(params.model().size()));
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  return s;
}

void adam_step(AdamState& state, MlpParams& params, const LossGradient& grad, double lr, double param_lr,
               bool update_model) {
  if (grad.theta.size() != params.theta().size() || state.m1.size() != params.theta().size()) {
    throw ContractViolation("adam_step: gradient or moments do not cover every weight");
  }
  if (update_model && (grad.model.size() != static_cast<Index>(params.model().size()) ||
                       state.model_m1.size() != grad.model.size())) {
    throw ContractViolation("adam_step: gradient or moments do not cover every model parameter");
  }
  for (Index i = 0; i < grad.theta.size(); ++i) {
    if (!std::isfinite(grad.theta[i])) {
      throw NumericError("non-finite gradient for " + params.describe(static_cast<std::size_t>(i)));
    }
  }
  if (update_model) {
    for (Index i = 0; i < grad.model.size(); ++i) {
      if (!std::isfinite(grad.model[i])) {
        throw NumericError("non-finite gradient for model parameter " + params.model().names[static_cast<std::size_t>(i)]);
      }
    }
  }

  ++state.step_count;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  const auto update = [&](Eigen::Ref<Eigen::VectorXd> x, Eigen::VectorXd& m, Eigen::VectorXd& v,
                          const Eigen::VectorXd& g, double step) {
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseAbs2();
    x.array() -= step * (m.array() / c1) / ((v.array() / c2).sqrt() + state.eps);
  };
  update(params.theta(), state.m1, state.m2, grad.theta, lr);
  if (update_model) {
    Eigen::Map<Eigen::VectorXd> p(params.model().values.data(), static_cast<Index>(params.model().size()));
    update(p, state.model_m1, state.model_m2, grad.model, param_lr);
  }
}

void write_trace_csv(const TrainingTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "epoch,loss_ge,loss_ic,loss_bc,loss_obs,loss_total";
  for (std::size_t i = 0; i < trace.param_names.size(); ++i) out << ",p_" << (i + 1);
  out << ",seconds\n" << std::setprecision(17);
  for (const auto& r : trace.records) {
    out << r.epoch << ',' << r.loss.ge << ',' << r.loss.ic << ',' << r.loss.bc << ',' << r.loss.obs << ','
        << r.loss.total;
    for (double p : r.model_params) out << ',' << p;
    out << ',' << r.seconds << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

TrainResult train(const ProblemSpec& spec, MlpParams params, const TrainConfig& cfg, const ObservationSet* obs) {
  cfg.validate();
  const bool inverse = cfg.mode == Mode::inverse;
  if (inverse && (obs == nullptr || obs->empty())) throw ConfigError("inverse mode needs a non-empty observation set");

  TrainResult result{std::move(params), {}, 0, std::nullopt};
  result.trace.param_names = result.params.model().names;
  auto adam = AdamState::for_params(result.params, cfg.beta1, cfg.beta2, cfg.adam_eps);
  std::mt19937_64 rng(cfg.seed);
  const auto start = std::chrono::steady_clock::now();

  Batches batches;
  if (cfg.fixed_batches) batches = sample_batches(spec, cfg, rng);

  LossGradient grad;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (!cfg.fixed_batches) batches = sample_batches(spec, cfg, rng);
    const auto loss = loss_total(spec, result.params, batches, obs, cfg.mode, &grad);

    const bool last = epoch == cfg.epochs;
    const bool diverged = !std::isfinite(loss.total) || loss.total > cfg.divergence_limit;
    const bool converged = cfg.stop_loss && loss.total < *cfg.stop_loss;
    if (epoch % cfg.trace_every == 0 || epoch == 1 || last || diverged || converged) {
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      result.trace.records.push_back({epoch, loss, result.params.model().values, seconds});
    }
    if (diverged) {
      result.abort_reason = "loss diverged at epoch " + std::to_string(epoch) + " (total " + std::to_string(loss.total) + ")";
      break;
    }
    try {
      adam_step(adam, result.params, grad, cfg.lr, cfg.param_lr, inverse);
    } catch (const NumericError& e) {
      result.abort_reason = std::string(e.what()) + " at epoch " + std::to_string(epoch);
      break;
    }
    result.epochs_run = epoch;
    if (converged) break;
  }
  return result;
}

}  // namespace pinnforge
