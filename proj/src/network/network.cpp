#include "pinnforge/network.hpp"

#include <cmath>
#include <random>

#include "pinnforge/error.hpp"

namespace pinnforge {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::sin: return "sin";
    case Activation::identity: return "identity";
  }
  return "identity";
}

Activation activation_from_string(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  if (name == "sin") return Activation::sin;
  if (name == "identity" || name == "linear") return Activation::identity;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

void NetworkSpec::validate() const {
  if (input_dim == 0) throw ConfigError("network input width must be at least 1");
  if (layers.empty()) throw ConfigError("network needs at least an output layer");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].width == 0) throw ConfigError("layer " + std::to_string(l + 1) + " has width 0");
  }
  if (layers.back().activation != Activation::identity) throw ConfigError("output layer must be linear (identity)");
}

double ModelParams::at(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values.at(i);
  }
  throw ContractViolation("no model parameter named '" + std::string(name) + "'");
}

MlpParams::MlpParams(NetworkSpec spec, ModelParams model) : spec_(std::move(spec)), model_(std::move(model)) {
  spec_.validate();
  if (model_.names.size() != model_.values.size()) {
    throw ConfigError("model parameter names and values differ in length");
  }
  std::size_t offset = 0;
  std::size_t fan_in = spec_.input_dim;
  for (const auto& layer : spec_.layers) {
    offsets_.push_back(offset);
    offset += layer.width * fan_in + layer.width;
    fan_in = layer.width;
  }
  theta_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(offset));
}

std::size_t MlpParams::fan_in(std::size_t layer) const {
  return layer == 0 ? spec_.input_dim : spec_.layers.at(layer - 1).width;
}

std::size_t MlpParams::bias_offset(std::size_t layer) const {
  return offsets_.at(layer) + fan_out(layer) * fan_in(layer);
}

Eigen::Map<const Eigen::MatrixXd> MlpParams::weight(std::size_t layer) const {
  return {theta_.data() + offsets_.at(layer), static_cast<Eigen::Index>(fan_out(layer)),
          static_cast<Eigen::Index>(fan_in(layer))};
}

Eigen::Map<Eigen::MatrixXd> MlpParams::weight(std::size_t layer) {
  return {theta_.data() + offsets_.at(layer), static_cast<Eigen::Index>(fan_out(layer)),
          static_cast<Eigen::Index>(fan_in(layer))};
}

Eigen::Map<const Eigen::VectorXd> MlpParams::bias(std::size_t layer) const {
  return {theta_.data() + bias_offset(layer), static_cast<Eigen::Index>(fan_out(layer))};
}

Eigen::Map<Eigen::VectorXd> MlpParams::bias(std::size_t layer) {
  return {theta_.data() + bias_offset(layer), static_cast<Eigen::Index>(fan_out(layer))};
}

std::string MlpParams::describe(std::size_t index) const {
  for (std::size_t l = layer_count(); l-- > 0;) {
    if (index < offsets_[l]) continue;
    const auto local = index - offsets_[l];
    const auto rows = fan_out(l);
    const auto w_size = rows * fan_in(l);
    if (local < w_size) {
      return "W" + std::to_string(l + 1) + "(" + std::to_string(local % rows) + "," + std::to_string(local / rows) + ")";
    }
    return "b" + std::to_string(l + 1) + "(" + std::to_string(local - w_size) + ")";
  }
  return "theta[" + std::to_string(index) + "]";
}

bool operator==(const MlpParams& a, const MlpParams& b) {
  return a.spec_ == b.spec_ && a.theta_.size() == b.theta_.size() && a.theta_ == b.theta_ &&
         a.model_.names == b.model_.names && a.model_.values == b.model_.values;
}

MlpParams init_params(const NetworkSpec& spec, const ModelParams& param_init, std::uint64_t seed) {
  MlpParams params(spec, param_init);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    const double scale = std::sqrt(6.0 / static_cast<double>(params.fan_in(l) + params.fan_out(l)));
    std::uniform_real_distribution<double> dist(-scale, scale);
    auto w = params.weight(l);
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = dist(rng);
    }
    params.bias(l).setZero();
  }
  return params;
}

double activate(Activation a, double z) {
  switch (a) {
    case Activation::relu: return ad::relu(z);
    case Activation::sigmoid: return ad::sigmoid(z);
    case Activation::tanh: return std::tanh(z);
    case Activation::sin: return std::sin(z);
    case Activation::identity: return z;
  }
  return z;
}

double activate_d1(Activation a, double z) {
  switch (a) {
    case Activation::relu: return ad::relu_step(z);
    case Activation::sigmoid: {
      const double s = ad::sigmoid(z);
      return s * (1.0 - s);
    }
    case Activation::tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::sin: return std::cos(z);
    case Activation::identity: return 1.0;
  }
  return 1.0;
}

double activate_d2(Activation a, double z) {
  switch (a) {
    case Activation::relu: return 0.0;
    case Activation::sigmoid: {
      const double s = ad::sigmoid(z);
      return s * (1.0 - s) * (1.0 - 2.0 * s);
    }
    case Activation::tanh: {
      const double t = std::tanh(z);
      return -2.0 * t * (1.0 - t * t);
    }
    case Activation::sin: return -std::sin(z);
    case Activation::identity: return 0.0;
  }
  return 0.0;
}

Eigen::VectorXd forward(const MlpParams& params, std::span<const double> input) {
  const auto& spec = params.spec();
  if (input.size() != spec.input_dim) {
    throw ContractViolation("forward: input has " + std::to_string(input.size()) + " entries, network expects " +
                            std::to_string(spec.input_dim));
  }
  Eigen::VectorXd act = Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    Eigen::VectorXd z = params.weight(l) * act + params.bias(l);
    const auto a = spec.layers[l].activation;
    if (a != Activation::identity) z = z.unaryExpr([a](double v) { return activate(a, v); });
    act = std::move(z);
  }
  return act;
}

std::vector<ad::Jet<double>> forward_jet(const MlpParams& params, std::span<const double> input) {
  const auto& theta = params.theta();
  return forward_jet<double>(params.spec(), std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size())),
                             input);
}

std::vector<ad::Var> tape_weights(ad::Tape& tape, const MlpParams& params) {
  std::vector<ad::Var> leaves;
  leaves.reserve(static_cast<std::size_t>(params.theta().size()));
  for (Eigen::Index i = 0; i < params.theta().size(); ++i) leaves.push_back(tape.leaf(params.theta()[i]));
  return leaves;
}

}  // namespace pinnforge
