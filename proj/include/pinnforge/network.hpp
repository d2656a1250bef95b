#pragma once

// Fully connected feed-forward network
//
//   z^l = W^l sigma_{l-1}(z^{l-1}) + b^l,   z^0 = input,
//
// with one activation per hidden layer and a linear output layer.
//
// Two evaluation paths share the same parameters:
//  * `forward` / `forward_jet<T>`: one input at a time, generic over the
//    scalar type so the network can be recorded on an `ad::Tape`.
//  * `BatchPass`: a whole batch at once, propagating value and input
//    derivatives as column blocks of dense matrices, with a hand-written
//    reverse sweep. This is what training uses; the taped path is its oracle.

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pinnforge/autodiff/jet.hpp"
#include "pinnforge/autodiff/tape.hpp"

namespace pinnforge {

enum class Activation { relu, sigmoid, tanh, sin, identity };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

struct LayerSpec {
  std::size_t width = 1;
  Activation activation = Activation::identity;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Input width plus every layer after the input; the last entry is the
/// output layer and must be linear.
struct NetworkSpec {
  std::size_t input_dim = 1;
  std::vector<LayerSpec> layers;

  void validate() const;
  std::size_t output_dim() const { return layers.back().width; }

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Named model parameters p of the differential equation.
struct ModelParams {
  std::vector<std::string> names;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double at(std::string_view name) const;
};

/// Weights and biases stored in one flat vector, layer by layer: W^l
/// (column-major, rows = width of layer l) followed by b^l.
class MlpParams {
 public:
  MlpParams() = default;
  MlpParams(NetworkSpec spec, ModelParams model);

  const NetworkSpec& spec() const noexcept { return spec_; }
  std::size_t layer_count() const noexcept { return spec_.layers.size(); }
  std::size_t fan_in(std::size_t layer) const;
  std::size_t fan_out(std::size_t layer) const { return spec_.layers.at(layer).width; }

  Eigen::Map<const Eigen::MatrixXd> weight(std::size_t layer) const;
  Eigen::Map<Eigen::MatrixXd> weight(std::size_t layer);
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;
  Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);

  /// Offset of W^l and of b^l inside `theta`.
  std::size_t weight_offset(std::size_t layer) const { return offsets_.at(layer); }
  std::size_t bias_offset(std::size_t layer) const;

  const Eigen::VectorXd& theta() const noexcept { return theta_; }
  Eigen::VectorXd& theta() noexcept { return theta_; }

  const ModelParams& model() const noexcept { return model_; }
  ModelParams& model() noexcept { return model_; }

  /// Human-readable name of flat entry `index` ("W2(3,4)", "b1(0)").
  std::string describe(std::size_t index) const;

  friend bool operator==(const MlpParams& a, const MlpParams& b);

 private:
  NetworkSpec spec_;
  std::vector<std::size_t> offsets_;
  Eigen::VectorXd theta_;
  ModelParams model_;
};

/// Uniform(-s, s) weights with s = sqrt(6 / (fan_in + fan_out)), zero biases.
MlpParams init_params(const NetworkSpec& spec, const ModelParams& param_init, std::uint64_t seed);

double activate(Activation a, double z);
double activate_d1(Activation a, double z);
double activate_d2(Activation a, double z);

/// Output z^L for one input.
Eigen::VectorXd forward(const MlpParams& params, std::span<const double> input);

template <class T>
T activate_generic(Activation a, const T& z) {
  using std::sin;
  using std::tanh;
  switch (a) {
    case Activation::relu: return ad::relu(z);
    case Activation::sigmoid: return ad::sigmoid(z);
    case Activation::tanh: return tanh(z);
    case Activation::sin: return sin(z);
    case Activation::identity: return z;
  }
  return z;
}

template <class T>
ad::Jet<T> activate_generic(Activation a, const ad::Jet<T>& z) {
  switch (a) {
    case Activation::relu: return ad::relu(z);
    case Activation::sigmoid: return ad::sigmoid(z);
    case Activation::tanh: return ad::tanh(z);
    case Activation::sin: return ad::sin(z);
    case Activation::identity: return z;
  }
  return z;
}

/// Network outputs as jets over the input basis, one input at a time.
///
/// `theta` holds the flat weights/biases in the `MlpParams` layout; with
/// `T = ad::Var` they are tape leaves and every value and partial is taped.
template <class T>
std::vector<ad::Jet<T>> forward_jet(const NetworkSpec& spec, std::span<const T> theta,
                                    std::span<const double> input, ad::BasisTag tag = 0) {
  spec.validate();
  if (input.size() != spec.input_dim) {
    throw ContractViolation("forward_jet: input has " + std::to_string(input.size()) + " entries, network expects " +
                            std::to_string(spec.input_dim));
  }
  std::vector<ad::Jet<T>> act;
  act.reserve(spec.input_dim);
  for (std::size_t i = 0; i < spec.input_dim; ++i) act.push_back(ad::lift_input<T>(input, i, tag));

  std::size_t offset = 0;
  std::size_t fan_in = spec.input_dim;
  for (std::size_t l = 0; l < spec.layers.size(); ++l) {
    const auto& layer = spec.layers[l];
    std::vector<ad::Jet<T>> next;
    next.reserve(layer.width);
    const std::size_t bias_offset = offset + layer.width * fan_in;
    for (std::size_t j = 0; j < layer.width; ++j) {
      auto z = ad::Jet<T>::constant(theta[bias_offset + j], spec.input_dim, tag);
      for (std::size_t k = 0; k < fan_in; ++k) z = z + theta[offset + k * layer.width + j] * act[k];
      next.push_back(activate_generic(layer.activation, z));
    }
    act = std::move(next);
    offset = bias_offset + layer.width;
    fan_in = layer.width;
  }
  return act;
}

std::vector<ad::Jet<double>> forward_jet(const MlpParams& params, std::span<const double> input);

/// Registers every weight and bias of `params` as a leaf on `tape`; leaf
/// ordinal i corresponds to theta[i].
std::vector<ad::Var> tape_weights(ad::Tape& tape, const MlpParams& params);

/// Outputs of a batched evaluation. `value` is output_dim x B; when the pass
/// carries jets, `d1[k]` is the output_dim x B matrix of partials with
/// respect to input coordinate k.
struct BatchJets {
  Eigen::MatrixXd value;
  std::vector<Eigen::MatrixXd> d1;

  std::size_t batch() const { return static_cast<std::size_t>(value.cols()); }
  bool has_jets() const { return !d1.empty(); }

  /// Zero matrices shaped like `like`.
  static BatchJets zeros_like(const BatchJets& like);
};

/// Batched evaluation with reverse sweep.
///
/// Activations of each layer are stored as one N_l x (B * C) matrix whose
/// column blocks are [value | d/dx_0 | ... | d/dx_{n-1}], C = 1 + n when jets
/// are requested and C = 1 otherwise, so each layer is a single GEMM.
class BatchPass {
 public:
  /// `inputs` is input_dim x B.
  BatchPass(const MlpParams& params, const Eigen::MatrixXd& inputs, bool with_jets);

  const BatchJets& outputs() const noexcept { return outputs_; }

  /// Adds d(loss)/d(theta) to `theta_grad`, given d(loss)/d(outputs) shaped
  /// like `outputs()`.
  void backward(const BatchJets& adjoint, Eigen::Ref<Eigen::VectorXd> theta_grad) const;

 private:
  const MlpParams* params_;
  std::size_t batch_;
  std::size_t channels_;
  std::vector<Eigen::MatrixXd> pre_;   // z^l for l = 1..L
  std::vector<Eigen::MatrixXd> post_;  // sigma(z^l) jets for hidden layers; post_[0] = input block
  BatchJets outputs_;
};

/// JSON checkpoint: format tag, layer shapes and activations, row-major
/// weights, biases and model parameters. Loading validates every shape.
void save_checkpoint(const MlpParams& params, const std::filesystem::path& path);
MlpParams load_checkpoint(const std::filesystem::path& path);

}  // namespace pinnforge
