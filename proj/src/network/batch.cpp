#include "pinnforge/error.hpp"
#include "pinnforge/network.hpp"

namespace pinnforge {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

MatrixXd apply(Activation a, const MatrixXd& z, double (*fn)(Activation, double)) {
  return z.unaryExpr([a, fn](double v) { return fn(a, v); });
}

}  // namespace

BatchJets BatchJets::zeros_like(const BatchJets& like) {
  BatchJets out;
  out.value = MatrixXd::Zero(like.value.rows(), like.value.cols());
  for (const auto& d : like.d1) out.d1.push_back(MatrixXd::Zero(d.rows(), d.cols()));
  return out;
}

BatchPass::BatchPass(const MlpParams& params, const MatrixXd& inputs, bool with_jets)
    : params_(&params), batch_(static_cast<std::size_t>(inputs.cols())) {
  const auto& spec = params.spec();
  if (static_cast<std::size_t>(inputs.rows()) != spec.input_dim) {
    throw ContractViolation("BatchPass: inputs have " + std::to_string(inputs.rows()) + " rows, network expects " +
                            std::to_string(spec.input_dim));
  }
  const auto n_in = static_cast<Index>(spec.input_dim);
  const auto B = static_cast<Index>(batch_);
  channels_ = with_jets ? spec.input_dim + 1 : 1;
  const auto C = static_cast<Index>(channels_);

  MatrixXd input = MatrixXd::Zero(n_in, B * C);
  input.leftCols(B) = inputs;
  if (with_jets) {
    for (Index k = 0; k < n_in; ++k) input.block(k, (1 + k) * B, 1, B).setOnes();
  }
  post_.push_back(std::move(input));

  const auto L = params.layer_count();
  for (std::size_t l = 0; l < L; ++l) {
    MatrixXd z = params.weight(l) * post_.back();
    z.leftCols(B).colwise() += params.bias(l);
    const auto a = spec.layers[l].activation;
    if (l + 1 < L) {
      MatrixXd act(z.rows(), z.cols());
      const MatrixXd zv = z.leftCols(B);
      act.leftCols(B) = apply(a, zv, activate);
      if (C > 1) {
        const MatrixXd slope = apply(a, zv, activate_d1);
        for (Index k = 1; k < C; ++k) act.middleCols(k * B, B) = slope.cwiseProduct(z.middleCols(k * B, B));
      }
      post_.push_back(std::move(act));
    }
    pre_.push_back(std::move(z));
  }

  const MatrixXd& out = pre_.back();
  outputs_.value = out.leftCols(B);
  for (Index k = 1; k < C; ++k) outputs_.d1.push_back(out.middleCols(k * B, B));
}

void BatchPass::backward(const BatchJets& adjoint, Eigen::Ref<Eigen::VectorXd> theta_grad) const {
  const auto& params = *params_;
  const auto& spec = params.spec();
  const auto B = static_cast<Index>(batch_);
  const auto C = static_cast<Index>(channels_);
  if (adjoint.value.rows() != outputs_.value.rows() || adjoint.value.cols() != B ||
      adjoint.d1.size() != outputs_.d1.size()) {
    throw ContractViolation("BatchPass::backward: adjoint shape does not match outputs");
  }
  if (theta_grad.size() != params.theta().size()) {
    throw ContractViolation("BatchPass::backward: gradient vector has the wrong length");
  }

  MatrixXd zbar(adjoint.value.rows(), B * C);
  zbar.leftCols(B) = adjoint.value;
  for (Index k = 1; k < C; ++k) zbar.middleCols(k * B, B) = adjoint.d1[static_cast<std::size_t>(k - 1)];

  for (std::size_t l = params.layer_count(); l-- > 0;) {
    const auto rows = static_cast<Index>(params.fan_out(l));
    const auto cols = static_cast<Index>(params.fan_in(l));
    Eigen::Map<MatrixXd> w_grad(theta_grad.data() + params.weight_offset(l), rows, cols);
    w_grad.noalias() += zbar * post_[l].transpose();
    Eigen::Map<Eigen::VectorXd>(theta_grad.data() + params.bias_offset(l), rows) += zbar.leftCols(B).rowwise().sum();
    if (l == 0) break;

    const MatrixXd abar = params.weight(l).transpose() * zbar;
    const auto a = spec.layers[l - 1].activation;
    const MatrixXd& z = pre_[l - 1];
    const MatrixXd zv = z.leftCols(B);
    const MatrixXd slope = apply(a, zv, activate_d1);
    MatrixXd prev(abar.rows(), abar.cols());
    prev.leftCols(B) = abar.leftCols(B).cwiseProduct(slope);
    if (C > 1) {
      const bool curved = a != Activation::relu && a != Activation::identity;
      const MatrixXd curvature = curved ? apply(a, zv, activate_d2) : MatrixXd();
      for (Index k = 1; k < C; ++k) {
        const auto ak = abar.middleCols(k * B, B);
        prev.middleCols(k * B, B) = ak.cwiseProduct(slope);
        if (curved) prev.leftCols(B) += ak.cwiseProduct(curvature).cwiseProduct(z.middleCols(k * B, B));
      }
    }
    zbar = std::move(prev);
  }
}

}  // namespace pinnforge
