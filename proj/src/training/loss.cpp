#include <optional>

#include "pinnforge/error.hpp"
#include "pinnforge/training.hpp"

namespace pinnforge {

using ad::Jet;
using ad::Var;
using Eigen::Index;

std::string_view to_string(Mode mode) { return mode == Mode::forward ? "forward" : "inverse"; }

Mode mode_from_string(std::string_view name) {
  if (name == "forward") return Mode::forward;
  if (name == "inverse") return Mode::inverse;
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected forward or inverse)");
}

std::vector<std::vector<double>> initial_targets(const ProblemSpec& spec, const Eigen::MatrixXd& initial) {
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(initial.cols()));
  std::vector<double> x(spec.spatial_dim());
  for (Index s = 0; s < initial.cols(); ++s) {
    for (std::size_t d = 0; d < x.size(); ++d) x[d] = initial(static_cast<Index>(d + 1), s);
    out.push_back(initial_eval(spec, x));
  }
  return out;
}

std::vector<std::vector<double>> boundary_targets(const ProblemSpec& spec, const Eigen::MatrixXd& boundary) {
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(boundary.cols()));
  std::vector<double> x(spec.spatial_dim());
  for (Index s = 0; s < boundary.cols(); ++s) {
    for (std::size_t d = 0; d < x.size(); ++d) x[d] = boundary(static_cast<Index>(d + 1), s);
    out.push_back(boundary_eval(spec, boundary(0, s), x));
  }
  return out;
}

std::vector<std::vector<double>> observation_targets(const ObservationSet& obs) {
  std::vector<std::vector<double>> out(obs.size());
  for (Index k = 0; k < obs.values.cols(); ++k) {
    out[static_cast<std::size_t>(k)].assign(obs.values.col(k).data(), obs.values.col(k).data() + obs.values.rows());
  }
  return out;
}

SampleValues<double> select_values(const Eigen::MatrixXd& value, const std::vector<std::size_t>& outputs) {
  SampleValues<double> out(static_cast<std::size_t>(value.cols()));
  for (Index s = 0; s < value.cols(); ++s) {
    for (auto o : outputs) out[static_cast<std::size_t>(s)].push_back(value(static_cast<Index>(o), s));
  }
  return out;
}

SampleJets<double> to_sample_jets(const BatchJets& jets) {
  SampleJets<double> out(jets.batch());
  const auto n_out = jets.value.rows();
  for (Index s = 0; s < jets.value.cols(); ++s) {
    auto& sample = out[static_cast<std::size_t>(s)];
    for (Index o = 0; o < n_out; ++o) {
      std::vector<double> d1;
      for (const auto& d : jets.d1) d1.push_back(d(o, s));
      sample.emplace_back(jets.value(o, s), std::move(d1));
    }
  }
  return out;
}

namespace {

void check_inputs(const ProblemSpec& spec, const MlpParams& params) {
  if (params.spec().input_dim != spec.input_dim() || params.spec().output_dim() != spec.output_dim) {
    throw ContractViolation("network shape does not match problem " + std::string(spec.name()));
  }
  if (params.model().names != spec.param_names) {
    throw ContractViolation("model parameter names do not match problem " + std::string(spec.name()));
  }
}

// Taped copies of batch outputs plus the bookkeeping to scatter adjoints back.
class TapedBatch {
 public:
  TapedBatch(ad::Tape& tape, const BatchJets& jets) : jets_(&jets) {
    // Leaves in sample-major order: value, then d/dx_k, for every output.
    const auto n_out = jets.value.rows();
    samples_.resize(jets.batch());
    for (Index s = 0; s < jets.value.cols(); ++s) {
      auto& sample = samples_[static_cast<std::size_t>(s)];
      for (Index o = 0; o < n_out; ++o) {
        const Var value = leaf(tape, 0, o, s);
        std::vector<Var> d1;
        for (std::size_t k = 0; k < jets.d1.size(); ++k) d1.push_back(leaf(tape, k + 1, o, s));
        sample.emplace_back(value, std::move(d1));
      }
    }
  }

  // Value-only leaves for the selected output rows.
  TapedBatch(ad::Tape& tape, const BatchJets& jets, const std::vector<std::size_t>& outputs) : jets_(&jets) {
    values_.resize(jets.batch());
    for (Index s = 0; s < jets.value.cols(); ++s) {
      for (auto o : outputs) values_[static_cast<std::size_t>(s)].push_back(leaf(tape, 0, static_cast<Index>(o), s));
    }
  }

  const SampleJets<Var>& jets() const { return samples_; }
  const SampleValues<Var>& values() const { return values_; }

  BatchJets adjoint(const std::vector<double>& node_adjoints) const {
    auto adj = BatchJets::zeros_like(*jets_);
    for (const auto& e : entries_) {
      auto& m = e.channel == 0 ? adj.value : adj.d1[e.channel - 1];
      m(e.row, e.col) = node_adjoints.size() > e.node ? node_adjoints[e.node] : 0.0;
    }
    return adj;
  }

 private:
  struct Entry {
    std::size_t node;
    std::size_t channel;
    Index row;
    Index col;
  };

  Var leaf(ad::Tape& tape, std::size_t channel, Index row, Index col) {
    const double v = channel == 0 ? jets_->value(row, col) : jets_->d1[channel - 1](row, col);
    const Var x = tape.leaf(v);
    entries_.push_back({x.index(), channel, row, col});
    return x;
  }

  const BatchJets* jets_;
  SampleJets<Var> samples_;
  SampleValues<Var> values_;
  std::vector<Entry> entries_;
};

}  // namespace

double loss_ge(const ProblemSpec& spec, const MlpParams& params, const Eigen::MatrixXd& interior) {
  check_inputs(spec, params);
  const BatchPass pass(params, interior, true);
  return loss_ge<double>(spec, to_sample_jets(pass.outputs()), params.model().values);
}

double loss_ic(const ProblemSpec& spec, const MlpParams& params, const Eigen::MatrixXd& initial) {
  check_inputs(spec, params);
  const BatchPass pass(params, initial, false);
  return mean_squared<double>(select_values(pass.outputs().value, spec.initial_outputs),
                              initial_targets(spec, initial));
}

double loss_bc(const ProblemSpec& spec, const MlpParams& params, const Eigen::MatrixXd& boundary) {
  check_inputs(spec, params);
  if (!spec.has_boundary() || boundary.cols() == 0) return 0.0;
  const BatchPass pass(params, boundary, false);
  return mean_squared<double>(select_values(pass.outputs().value, spec.boundary_outputs),
                              boundary_targets(spec, boundary));
}

double loss_obs(const ProblemSpec& spec, const MlpParams& params, const ObservationSet& obs) {
  check_inputs(spec, params);
  if (obs.empty()) throw ContractViolation("loss_obs: empty observation set");
  const BatchPass pass(params, obs.points, false);
  return mean_squared<double>(select_values(pass.outputs().value, obs.outputs), observation_targets(obs));
}

LossBreakdown loss_total(const ProblemSpec& spec, const MlpParams& params, const Batches& batches,
                         const ObservationSet* obs, Mode mode, LossGradient* grad) {
  check_inputs(spec, params);
  const bool inverse = mode == Mode::inverse;
  if (inverse && (obs == nullptr || obs->empty())) throw ConfigError("inverse mode needs a non-empty observation set");
  if (batches.interior.cols() == 0 || batches.initial.cols() == 0) {
    throw ContractViolation("loss_total: interior and initial batches must be non-empty");
  }

  const BatchPass interior(params, batches.interior, true);
  const BatchPass initial(params, batches.initial, false);
  std::optional<BatchPass> boundary;
  if (spec.has_boundary() && batches.boundary.cols() > 0) boundary.emplace(params, batches.boundary, false);
  std::optional<BatchPass> observed;
  if (inverse) observed.emplace(params, obs->points, false);

  const auto ic_targets = initial_targets(spec, batches.initial);
  const auto bc_targets = boundary ? boundary_targets(spec, batches.boundary) : std::vector<std::vector<double>>{};
  const auto obs_targets = inverse ? observation_targets(*obs) : std::vector<std::vector<double>>{};

  if (grad == nullptr) {
    LossBreakdown out;
    const auto& p = params.model().values;
    out.ge = loss_ge<double>(spec, to_sample_jets(interior.outputs()), p);
    out.ic = mean_squared<double>(select_values(initial.outputs().value, spec.initial_outputs), ic_targets);
    if (boundary) {
      out.bc = mean_squared<double>(select_values(boundary->outputs().value, spec.boundary_outputs), bc_targets);
    }
    if (observed) out.obs = mean_squared<double>(select_values(observed->outputs().value, obs->outputs), obs_targets);
    out.total = out.ge + out.ic + out.bc + out.obs;
    return out;
  }

  ad::Tape tape;
  std::vector<Var> p;
  for (double v : params.model().values) p.push_back(inverse ? tape.leaf(v) : Var(v));

  const TapedBatch t_interior(tape, interior.outputs());
  const TapedBatch t_initial(tape, initial.outputs(), spec.initial_outputs);
  std::optional<TapedBatch> t_boundary;
  if (boundary) t_boundary.emplace(tape, boundary->outputs(), spec.boundary_outputs);
  std::optional<TapedBatch> t_observed;
  if (observed) t_observed.emplace(tape, observed->outputs(), obs->outputs);

  const Var ge = loss_ge<Var>(spec, t_interior.jets(), p);
  const Var ic = mean_squared<Var>(t_initial.values(), ic_targets);
  const Var bc = t_boundary ? mean_squared<Var>(t_boundary->values(), bc_targets) : Var(0.0);
  const Var ob = t_observed ? mean_squared<Var>(t_observed->values(), obs_targets) : Var(0.0);
  const Var total = ge + ic + bc + ob;

  LossBreakdown out{ge.value(), ic.value(), bc.value(), ob.value(), 0.0};
  out.total = out.ge + out.ic + out.bc + out.obs;

  grad->theta = Eigen::VectorXd::Zero(params.theta().size());
  grad->model = Eigen::VectorXd::Zero(static_cast<Index>(params.model().size()));
  if (total.is_constant()) return out;

  const auto adj = tape.adjoints(total.index());
  const auto node_adj = [&](const Var& v) { return v.is_constant() || v.index() >= adj.size() ? 0.0 : adj[v.index()]; };
  if (inverse) {
    for (std::size_t i = 0; i < p.size(); ++i) grad->model[static_cast<Index>(i)] = node_adj(p[i]);
  }
  interior.backward(t_interior.adjoint(adj), grad->theta);
  initial.backward(t_initial.adjoint(adj), grad->theta);
  if (boundary) boundary->backward(t_boundary->adjoint(adj), grad->theta);
  if (observed) observed->backward(t_observed->adjoint(adj), grad->theta);
  return out;
}

}  // namespace pinnforge
