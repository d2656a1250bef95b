#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "pinnforge/error.hpp"
#include "pinnforge/training.hpp"
#include "support/finite_difference.hpp"

using namespace pinnforge;

namespace {

NetworkSpec small_net(const ProblemSpec& spec, std::vector<std::size_t> hidden, Activation act) {
  NetworkSpec net{spec.input_dim(), {}};
  for (auto w : hidden) net.layers.push_back({w, act});
  net.layers.push_back({spec.output_dim, Activation::identity});
  return net;
}

MlpParams small_params(const ProblemSpec& spec, std::vector<std::size_t> hidden, Activation act, std::uint64_t seed,
                       double p_init = 1.0) {
  return init_params(small_net(spec, std::move(hidden), act),
                     {spec.param_names, std::vector<double>(spec.param_names.size(), p_init)}, seed);
}

// Single identity layer: output = W input + b.
MlpParams linear_params(const ProblemSpec& spec) {
  NetworkSpec net{spec.input_dim(), {{spec.output_dim, Activation::identity}}};
  MlpParams p(net, {spec.param_names, spec.true_params});
  p.theta().setZero();
  return p;
}

bool inside(const ProblemSpec& spec, const Eigen::VectorXd& pt) {
  if (pt[0] < 0.0 || pt[0] > spec.t_end) return false;
  for (std::size_t d = 0; d < spec.spatial_dim(); ++d) {
    const auto v = pt[static_cast<Eigen::Index>(d + 1)];
    if (v < spec.space[d].lo || v > spec.space[d].hi) return false;
  }
  return true;
}

std::vector<double> spatial(const Eigen::VectorXd& pt) { return {pt.data() + 1, pt.data() + pt.size()}; }

ObservationSet single_observation(const ProblemSpec& spec, std::vector<double> point, std::vector<double> values) {
  ObservationSet obs;
  obs.input_dim = spec.input_dim();
  obs.outputs = spec.observed_outputs;
  obs.points = Eigen::Map<Eigen::MatrixXd>(point.data(), static_cast<Eigen::Index>(point.size()), 1);
  obs.values = Eigen::Map<Eigen::MatrixXd>(values.data(), static_cast<Eigen::Index>(values.size()), 1);
  return obs;
}

const std::vector<std::string> kProblems{"transport1d", "heat2d", "wave2d", "lotka_volterra"};

}  // namespace

TEST_CASE("sample_batches: points lie in their regions") {
  TrainConfig cfg;
  for (const auto& name : kProblems) {
    CAPTURE(name);
    const auto spec = make_problem(name);
    std::mt19937_64 rng(3);
    const auto b = sample_batches(spec, cfg, rng);
    REQUIRE(b.interior.rows() == static_cast<Eigen::Index>(spec.input_dim()));
    CHECK(b.interior.cols() == static_cast<Eigen::Index>(cfg.batch_interior));
    for (Eigen::Index s = 0; s < b.interior.cols(); ++s) {
      CHECK(inside(spec, b.interior.col(s)));
      CHECK(b.interior(0, s) > 0.0);
    }
    for (Eigen::Index s = 0; s < b.initial.cols(); ++s) {
      CHECK(b.initial(0, s) == 0.0);
      CHECK(inside(spec, b.initial.col(s)));
    }
    for (Eigen::Index s = 0; s < b.boundary.cols(); ++s) {
      CHECK(inside(spec, b.boundary.col(s)));
      CHECK(on_boundary(spec, spatial(b.boundary.col(s))));
    }
  }
}

TEST_CASE("sample_batches: ODE batches are degenerate") {
  const auto spec = make_problem("lotka_volterra");
  std::mt19937_64 rng(1);
  const auto b = sample_batches(spec, TrainConfig{}, rng);
  CHECK(b.initial.rows() == 1);
  CHECK(b.initial.cols() == 1);
  CHECK(b.initial(0, 0) == 0.0);
  CHECK(b.boundary.cols() == 0);
}

TEST_CASE("sample_batches: transport boundary is the inflow wall") {
  const auto spec = make_problem("transport1d");
  std::mt19937_64 rng(5);
  const auto b = sample_batches(spec, TrainConfig{}, rng);
  for (Eigen::Index s = 0; s < b.boundary.cols(); ++s) CHECK(b.boundary(1, s) == spec.space[0].lo);
}

TEST_CASE("sample_batches: seeded and reproducible") {
  const auto spec = make_problem("wave2d");
  std::mt19937_64 r1(11), r2(11), r3(12);
  const auto a = sample_batches(spec, TrainConfig{}, r1);
  const auto b = sample_batches(spec, TrainConfig{}, r2);
  const auto c = sample_batches(spec, TrainConfig{}, r3);
  CHECK(a.interior == b.interior);
  CHECK(a.initial == b.initial);
  CHECK(a.boundary == b.boundary);
  CHECK(a.interior != c.interior);
}

TEST_CASE("sample_batches: collocation grid restricts coordinates to grid axes") {
  const auto spec = make_problem("transport1d");
  TrainConfig cfg;
  cfg.collocation_grid = GridSpec{{5, 7}};
  std::mt19937_64 rng(2);
  const auto b = sample_batches(spec, cfg, rng);
  const auto ts = grid_axis(spec, *cfg.collocation_grid, 0);
  const auto xs = grid_axis(spec, *cfg.collocation_grid, 1);
  const auto on_axis = [](const std::vector<double>& axis, double v) {
    return std::find(axis.begin(), axis.end(), v) != axis.end();
  };
  for (Eigen::Index s = 0; s < b.interior.cols(); ++s) {
    CHECK(on_axis(ts, b.interior(0, s)));
    CHECK(on_axis(xs, b.interior(1, s)));
  }
}

TEST_CASE("loss_ge: zero network solves the heat system exactly") {
  const auto spec = make_problem("heat2d");
  auto p = small_params(spec, {8}, Activation::sin, 1);
  p.theta().setZero();
  std::mt19937_64 rng(4);
  const auto b = sample_batches(spec, TrainConfig{}, rng);
  CHECK(loss_ge(spec, p, b.interior) == 0.0);
  CHECK(loss_bc(spec, p, b.boundary) == 0.0);
}

TEST_CASE("loss_ge: exact jets give a vanishing residual loss") {
  for (const auto& name : kProblems) {
    CAPTURE(name);
    const auto spec = make_problem(name);
    const Oracle oracle(spec);
    std::mt19937_64 rng(8);
    const auto b = sample_batches(spec, TrainConfig{}, rng);
    SampleJets<double> jets;
    for (Eigen::Index s = 0; s < b.interior.cols(); ++s) {
      const Eigen::VectorXd pt = b.interior.col(s);
      jets.push_back(oracle.jets({pt.data(), static_cast<std::size_t>(pt.size())}));
    }
    const double tol = name == "transport1d" ? 1e-12 : 1e-8;
    CHECK(loss_ge<double>(spec, jets, spec.true_params) < tol);
  }
}

TEST_CASE("loss terms on the network u = t") {
  const auto spec = make_problem("transport1d");
  auto p = linear_params(spec);
  p.weight(0)(0, 0) = 1.0;

  Eigen::MatrixXd interior(2, 3);
  interior << 0.1, 0.5, 0.9, 0.2, 0.4, 0.7;
  // u_t + a u_x = 1 everywhere.
  CHECK(loss_ge(spec, p, interior) == doctest::Approx(1.0).epsilon(1e-15));

  Eigen::MatrixXd initial(2, 1);
  initial << 0.0, 0.3;
  const double f = initial_transport(0.3);
  CHECK(loss_ic(spec, p, initial) == doctest::Approx(f * f).epsilon(1e-15));
  CHECK(loss_ic(spec, p, initial) == doctest::Approx(3.58640e-7).epsilon(1e-4));

  Eigen::MatrixXd boundary(2, 2);
  boundary << 0.5, 1.0, 0.0, 0.0;
  CHECK(loss_bc(spec, p, boundary) == doctest::Approx((0.25 + 1.0) / 2.0).epsilon(1e-15));

  const auto obs = single_observation(spec, {0.5, 0.2}, {0.1});
  CHECK(loss_obs(spec, p, obs) == doctest::Approx(0.16).epsilon(1e-15));
}

TEST_CASE("loss_ic: constant (1, 1) network matches the ODE initial state") {
  const auto spec = make_problem("lotka_volterra");
  auto p = linear_params(spec);
  p.bias(0).setOnes();
  CHECK(loss_ic(spec, p, Eigen::MatrixXd::Zero(1, 1)) == 0.0);
  p.bias(0)[1] = 3.0;
  CHECK(loss_ic(spec, p, Eigen::MatrixXd::Zero(1, 1)) == doctest::Approx(4.0));
}

TEST_CASE("loss_total: decomposition and mode handling") {
  const auto spec = make_problem("transport1d");
  const auto p = small_params(spec, {6, 6}, Activation::tanh, 2);
  std::mt19937_64 rng(6);
  const auto b = sample_batches(spec, TrainConfig{}, rng);
  const Oracle oracle(spec);
  const auto obs = generate_observations(spec, oracle, default_grid(spec.kind), 17, 1);

  const auto inv = loss_total(spec, p, b, &obs, Mode::inverse);
  CHECK(inv.ge == doctest::Approx(loss_ge(spec, p, b.interior)).epsilon(1e-14));
  CHECK(inv.ic == doctest::Approx(loss_ic(spec, p, b.initial)).epsilon(1e-14));
  CHECK(inv.bc == doctest::Approx(loss_bc(spec, p, b.boundary)).epsilon(1e-14));
  CHECK(inv.obs == doctest::Approx(loss_obs(spec, p, obs)).epsilon(1e-14));
  CHECK(inv.total == inv.ge + inv.ic + inv.bc + inv.obs);

  const auto fwd = loss_total(spec, p, b, &obs, Mode::forward);
  CHECK(fwd.obs == 0.0);
  CHECK(fwd.total == fwd.forward());
  CHECK(loss_total(spec, p, b, nullptr, Mode::forward).total == fwd.total);

  LossGradient g;
  const auto taped = loss_total(spec, p, b, &obs, Mode::inverse, &g);
  CHECK(taped.total == doctest::Approx(inv.total).epsilon(1e-14));
  CHECK_THROWS_AS(loss_total(spec, p, b, nullptr, Mode::inverse), ConfigError);
}

TEST_CASE("loss_total: forward mode leaves the model gradient at zero") {
  const auto spec = make_problem("heat2d");
  auto p = small_params(spec, {5}, Activation::sin, 3);
  p.model().values = spec.true_params;
  std::mt19937_64 rng(1);
  const auto b = sample_batches(spec, TrainConfig{}, rng);
  LossGradient g;
  loss_total(spec, p, b, nullptr, Mode::forward, &g);
  CHECK(g.model.norm() == 0.0);
  CHECK(g.theta.norm() > 0.0);
}

TEST_CASE("loss_total: mismatched network is rejected") {
  const auto heat = make_problem("heat2d");
  const auto transport = make_problem("transport1d");
  const auto p = small_params(transport, {4}, Activation::tanh, 1);
  std::mt19937_64 rng(1);
  const auto b = sample_batches(heat, TrainConfig{}, rng);
  CHECK_THROWS_AS(loss_total(heat, p, b, nullptr, Mode::forward), ContractViolation);
}

TEST_CASE("loss_total: gradient matches central differences") {
  TrainConfig cfg;
  cfg.batch_interior = 6;
  cfg.batch_initial = 4;
  cfg.batch_boundary = 4;
  for (const auto& name : kProblems) {
    CAPTURE(name);
    const auto spec = make_problem(name);
    const Activation act = name == "transport1d" ? Activation::tanh : Activation::sin;
    auto p = small_params(spec, {3, 2}, act, 17, 0.7);
    if (name == "lotka_volterra") {
      // Keep t near the scale of the weights so the finite-difference step is meaningful.
      p.theta() *= 0.2;
    }
    std::mt19937_64 rng(9);
    const auto b = sample_batches(spec, cfg, rng);
    const Oracle oracle(spec);
    const auto obs = generate_observations(spec, oracle, GridSpec{std::vector<std::size_t>(spec.input_dim(), 4)},
                                           spec.input_dim() == 1 ? 4 : 5, 2);

    LossGradient g;
    loss_total(spec, p, b, &obs, Mode::inverse, &g);

    std::vector<double> x(p.theta().data(), p.theta().data() + p.theta().size());
    x.insert(x.end(), p.model().values.begin(), p.model().values.end());
    const auto n_theta = static_cast<std::size_t>(p.theta().size());
    const auto f = [&](const std::vector<double>& v) {
      auto q = p;
      for (std::size_t i = 0; i < n_theta; ++i) q.theta()[static_cast<Eigen::Index>(i)] = v[i];
      for (std::size_t i = 0; i < q.model().size(); ++i) q.model().values[i] = v[n_theta + i];
      return loss_total(spec, q, b, &obs, Mode::inverse).total;
    };
    const auto fd = testing::fd_gradient(f, x, 1e-6);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double ad = i < n_theta ? g.theta[static_cast<Eigen::Index>(i)] : g.model[static_cast<Eigen::Index>(i - n_theta)];
      CAPTURE(i);
      CHECK(testing::close(ad, fd[i], 1e-5, 1e-7));
    }
  }
}

TEST_CASE("adam_step: zero gradient leaves parameters in place") {
  const auto spec = make_problem("transport1d");
  auto p = small_params(spec, {4}, Activation::tanh, 1);
  const auto before = p;
  auto state = AdamState::for_params(p);
  LossGradient g{Eigen::VectorXd::Zero(p.theta().size()), Eigen::VectorXd::Zero(1)};
  adam_step(state, p, g, 1e-3, 1e-3, true);
  CHECK(p == before);
  CHECK(state.step_count == 1);
}

TEST_CASE("adam_step: first step moves each entry by the learning rate") {
  const auto spec = make_problem("transport1d");
  auto p = small_params(spec, {4}, Activation::tanh, 1);
  const auto before = p;
  auto state = AdamState::for_params(p);
  LossGradient g{Eigen::VectorXd::Constant(p.theta().size(), 0.5), Eigen::VectorXd::Constant(1, -2.0)};
  g.theta[0] = -3.0;
  adam_step(state, p, g, 1e-4, 1e-2, true);
  // Bias-corrected m / sqrt(v) = sign(g) on the first step, up to eps.
  CHECK(p.theta()[0] - before.theta()[0] == doctest::Approx(1e-4).epsilon(1e-6));
  CHECK(p.theta()[1] - before.theta()[1] == doctest::Approx(-1e-4).epsilon(1e-6));
  CHECK(p.model().values[0] - 1.0 == doctest::Approx(1e-2).epsilon(1e-6));
}

TEST_CASE("adam_step: frozen model parameters") {
  const auto spec = make_problem("transport1d");
  auto p = small_params(spec, {4}, Activation::tanh, 1);
  auto state = AdamState::for_params(p);
  LossGradient g{Eigen::VectorXd::Ones(p.theta().size()), Eigen::VectorXd::Ones(1)};
  adam_step(state, p, g, 1e-3, 1e-3, false);
  CHECK(p.model().values[0] == 1.0);
  CHECK(state.model_m1[0] == 0.0);
}

TEST_CASE("adam_step: non-finite gradient names the entry") {
  const auto spec = make_problem("transport1d");
  auto p = small_params(spec, {4}, Activation::tanh, 1);
  auto state = AdamState::for_params(p);
  LossGradient g{Eigen::VectorXd::Zero(p.theta().size()), Eigen::VectorXd::Zero(1)};
  g.theta[static_cast<Eigen::Index>(p.bias_offset(0) + 2)] = std::nan("");
  try {
    adam_step(state, p, g, 1e-3, 1e-3, true);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("b1(2)") != std::string::npos);
  }
  g.theta.setZero();
  g.model[0] = INFINITY;
  CHECK_THROWS_WITH_AS(adam_step(state, p, g, 1e-3, 1e-3, true), doctest::Contains("a"), NumericError);
}

TEST_CASE("train: zero epochs returns the initial parameters") {
  const auto spec = make_problem("transport1d");
  const auto p = small_params(spec, {4}, Activation::tanh, 1);
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.mode = Mode::forward;
  const auto r = train(spec, p, cfg, nullptr);
  CHECK(r.params == p);
  CHECK(r.epochs_run == 0);
  CHECK(r.trace.records.empty());
}

TEST_CASE("train: forward mode keeps model parameters bit-identical") {
  const auto spec = make_problem("heat2d");
  auto p = small_params(spec, {6}, Activation::sin, 1);
  p.model().values = {0.37};
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.lr = 1e-3;
  cfg.mode = Mode::forward;
  const auto r = train(spec, p, cfg, nullptr);
  CHECK(r.params.model().values[0] == 0.37);
  CHECK(r.params.theta() != p.theta());
}

TEST_CASE("train: inverse mode without observations is a config error") {
  const auto spec = make_problem("transport1d");
  TrainConfig cfg;
  cfg.epochs = 1;
  CHECK_THROWS_AS(train(spec, small_params(spec, {4}, Activation::tanh, 1), cfg, nullptr), ConfigError);
  cfg.lr = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("train: fixed batches descend") {
  const auto spec = make_problem("transport1d");
  const auto p = small_params(spec, {16, 16}, Activation::tanh, 4);
  TrainConfig cfg;
  cfg.epochs = 300;
  cfg.lr = 1e-3;
  cfg.mode = Mode::forward;
  cfg.fixed_batches = true;
  cfg.trace_every = 50;
  const auto r = train(spec, p, cfg, nullptr);
  REQUIRE(r.trace.records.size() >= 2);
  CHECK(r.trace.records.back().loss.total < 0.5 * r.trace.records.front().loss.total);
  CHECK(r.trace.records.front().epoch == 1);
  CHECK(r.trace.records.back().epoch == 300);
  CHECK_FALSE(r.abort_reason);
}

TEST_CASE("train: seeded runs are bit-identical") {
  const auto spec = make_problem("lotka_volterra");
  const auto p = small_params(spec, {8}, Activation::sin, 5);
  const Oracle oracle(spec);
  const auto obs = generate_observations(spec, oracle, default_grid(spec.kind), 40, 3);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.lr = 1e-3;
  cfg.seed = 21;
  const auto a = train(spec, p, cfg, &obs);
  const auto b = train(spec, p, cfg, &obs);
  CHECK(a.params == b.params);
  REQUIRE(a.trace.records.size() == b.trace.records.size());
  for (std::size_t i = 0; i < a.trace.records.size(); ++i) CHECK(a.trace.records[i].loss == b.trace.records[i].loss);
  cfg.seed = 22;
  CHECK_FALSE(train(spec, p, cfg, &obs).params == a.params);
}

TEST_CASE("train: divergence aborts with a reason and keeps the trace") {
  const auto spec = make_problem("transport1d");
  auto p = small_params(spec, {4}, Activation::tanh, 1);
  p.theta() *= 1e4;
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.mode = Mode::forward;
  cfg.divergence_limit = 1.0;
  const auto r = train(spec, p, cfg, nullptr);
  REQUIRE(r.abort_reason);
  CHECK(r.epochs_run == 0);
  REQUIRE(r.trace.records.size() == 1);
  CHECK(r.trace.records[0].loss.total > 1.0);
}

TEST_CASE("write_trace_csv: header and rows") {
  TrainingTrace trace{{"alpha", "beta"}, {{1, {1, 2, 3, 4, 10}, {0.5, 0.25}, 0.1}}};
  const auto path = std::filesystem::temp_directory_path() / "pinnforge_trace_test.csv";
  write_trace_csv(trace, path);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "epoch,loss_ge,loss_ic,loss_bc,loss_obs,loss_total,p_1,p_2,seconds");
  CHECK(row.rfind("1,1,2,3,4,10,0.5,0.25,", 0) == 0);
  std::filesystem::remove(path);
}
