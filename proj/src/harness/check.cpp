#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "pinnforge/error.hpp"
#include "pinnforge/harness.hpp"

namespace pinnforge {

namespace {

constexpr double kRelTol = 1e-5;
constexpr double kAbsTol = 1e-7;

// Largest absolute difference, and largest relative difference among entries
// that exceed the absolute floor.
struct Worst {
  double abs = 0.0;
  double rel = 0.0;

  void add(double a, double b) {
    const double diff = std::abs(a - b);
    abs = std::max(abs, diff);
    if (diff > kAbsTol) rel = std::max(rel, diff / std::max(std::abs(a), std::abs(b)));
  }
  bool within(double rel_tol) const { return rel < rel_tol; }
  std::string detail() const {
    std::ostringstream os;
    os << "max rel err " << rel << ", max abs diff " << abs;
    return os.str();
  }
};

std::string format(const char* label, double value) {
  std::ostringstream os;
  os << label << ' ' << value;
  return os.str();
}

CheckResult network_jets() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const Activation acts[] = {Activation::relu, Activation::sigmoid, Activation::tanh, Activation::sin};
  Worst worst;
  for (int trial = 0; trial < 40; ++trial) {
    const auto act = acts[trial % 4];
    NetworkSpec spec{3, {{7, act}, {5, act}, {2, Activation::identity}}};
    auto params = init_params(spec, {}, static_cast<std::uint64_t>(trial));
    for (Eigen::Index i = 0; i < params.theta().size(); ++i) params.theta()[i] += 0.1 * unit(rng);
    std::vector<double> x{unit(rng), unit(rng), unit(rng)};
    const auto jets = forward_jet(params, x);
    const double h = 1e-6;
    for (std::size_t k = 0; k < x.size(); ++k) {
      auto up = x, down = x;
      up[k] += h;
      down[k] -= h;
      const Eigen::VectorXd fd = (forward(params, up) - forward(params, down)) / (2.0 * h);
      for (std::size_t o = 0; o < jets.size(); ++o) {
        worst.add(jets[o].d(k), fd[static_cast<Eigen::Index>(o)]);
      }
    }
  }
  return {"network jets vs central differences", worst.within(kRelTol), worst.detail()};
}

CheckResult loss_gradients() {
  TrainConfig cfg;
  cfg.batch_interior = 5;
  cfg.batch_initial = 3;
  cfg.batch_boundary = 3;
  Worst worst;
  for (auto kind : {ProblemKind::transport1d, ProblemKind::heat2d, ProblemKind::wave2d, ProblemKind::lotka_volterra}) {
    const auto spec = make_problem(kind);
    NetworkSpec net{spec.input_dim(), {{4, Activation::tanh}, {3, Activation::sin}, {spec.output_dim, Activation::identity}}};
    auto params = init_params(net, {spec.param_names, std::vector<double>(spec.param_names.size(), 0.7)}, 3);
    if (kind == ProblemKind::lotka_volterra) params.theta() *= 0.2;
    std::mt19937_64 rng(5);
    const auto batches = sample_batches(spec, cfg, rng);
    const Oracle oracle(spec);
    const auto obs = generate_observations(spec, oracle, GridSpec{std::vector<std::size_t>(spec.input_dim(), 4)}, 4, 1);

    LossGradient g;
    loss_total(spec, params, batches, &obs, Mode::inverse, &g);
    const auto total = [&](const MlpParams& p) { return loss_total(spec, p, batches, &obs, Mode::inverse).total; };
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < params.theta().size(); ++i) {
      auto up = params, down = params;
      up.theta()[i] += h;
      down.theta()[i] -= h;
      worst.add(g.theta[i], (total(up) - total(down)) / (2.0 * h));
    }
    for (std::size_t i = 0; i < params.model().size(); ++i) {
      auto up = params, down = params;
      up.model().values[i] += h;
      down.model().values[i] -= h;
      worst.add(g.model[static_cast<Eigen::Index>(i)], (total(up) - total(down)) / (2.0 * h));
    }
  }
  return {"loss gradients vs central differences", worst.within(kRelTol), worst.detail()};
}

CheckResult oracle_residual(ProblemKind kind) {
  const auto spec = make_problem(kind);
  const Oracle oracle(spec);
  TrainConfig cfg;
  cfg.batch_interior = 500;
  std::mt19937_64 rng(11);
  const auto pts = sample_batches(spec, cfg, rng).interior;
  double sq = 0.0;
  for (Eigen::Index k = 0; k < pts.cols(); ++k) {
    const Eigen::VectorXd p = pts.col(k);
    for (double r : residual<double>(spec, oracle.jets({p.data(), static_cast<std::size_t>(p.size())}), spec.true_params)) {
      sq += r * r;
    }
  }
  const double rms = std::sqrt(sq / static_cast<double>(pts.cols()));
  const double tol = kind == ProblemKind::heat2d || kind == ProblemKind::wave2d ? 1e-4 : 1e-6;
  return {"reference residual " + std::string(spec.name()), rms < tol, format("rms", rms)};
}

CheckResult oracle_jets(ProblemKind kind) {
  const auto spec = make_problem(kind);
  const Oracle oracle(spec);
  TrainConfig cfg;
  cfg.batch_interior = 100;
  std::mt19937_64 rng(13);
  const auto pts = sample_batches(spec, cfg, rng).interior;
  const double h = kind == ProblemKind::lotka_volterra ? 1e-5 : 1e-6;
  Worst worst;
  for (Eigen::Index k = 0; k < pts.cols(); ++k) {
    std::vector<double> p(pts.col(k).data(), pts.col(k).data() + pts.rows());
    // Stay clear of the jump in the transport profile.
    if (kind == ProblemKind::transport1d && std::abs(p[1] - spec.true_params[0] * p[0] - 0.5) < 1e-3) continue;
    const auto jets = oracle.jets(p);
    for (std::size_t d = 0; d < p.size(); ++d) {
      auto up = p, down = p;
      up[d] += h;
      down[d] -= h;
      const auto vu = oracle.observed(up), vd = oracle.observed(down);
      for (std::size_t o = 0; o < spec.observed_outputs.size(); ++o) {
        worst.add(jets[spec.observed_outputs[o]].d(d), (vu[o] - vd[o]) / (2.0 * h));
      }
    }
  }
  return {"reference jets vs central differences " + std::string(spec.name()), worst.within(1e-4), worst.detail()};
}

CheckResult rk4_order() {
  const LvParams p;
  const auto ref = lv_rk4({0.00125, 10.0}, p, {1.0, 1.0}).back();
  const auto err = [&](double h) {
    const auto s = lv_rk4({h, 10.0}, p, {1.0, 1.0}).back();
    return std::hypot(s.u - ref.u, s.v - ref.v);
  };
  const double order = std::log2(err(0.01) / err(0.005));
  return {"RK4 measured order", order >= 3.9, format("order", order)};
}

CheckResult first_integral() {
  const LvParams p;
  const auto traj = lv_rk4({0.005, 100.0}, p, {1.0, 1.0});
  const double v0 = lv_first_integral(p, 1.0, 1.0);
  double drift = 0.0;
  for (const auto& s : traj) drift = std::max(drift, std::abs(lv_first_integral(p, s.u, s.v) - v0));
  return {"Lotka-Volterra first-integral drift", drift < 1e-5, format("max drift", drift)};
}

}  // namespace

std::vector<CheckResult> run_checks() {
  std::vector<CheckResult> out{network_jets(), loss_gradients()};
  for (auto kind : {ProblemKind::transport1d, ProblemKind::heat2d, ProblemKind::wave2d, ProblemKind::lotka_volterra}) {
    out.push_back(oracle_residual(kind));
    out.push_back(oracle_jets(kind));
  }
  out.push_back(rk4_order());
  out.push_back(first_integral());
  return out;
}

}  // namespace pinnforge
