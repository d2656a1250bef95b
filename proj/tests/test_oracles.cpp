#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "pinnforge/error.hpp"
#include "pinnforge/oracles.hpp"

using namespace pinnforge;

namespace {

constexpr double pi = std::numbers::pi;

// Composite Simpson in 2D for 4 * int int xy(1-x)(1-y) sin(m pi x) sin(n pi y).
double fourier_quadrature(int m, int n, int cells = 1000) {
  const double h = 1.0 / cells;
  const auto weight = [&](int i) { return (i == 0 || i == cells) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  double sum = 0.0;
  for (int i = 0; i <= cells; ++i) {
    const double x = i * h;
    for (int j = 0; j <= cells; ++j) {
      const double y = j * h;
      sum += weight(i) * weight(j) * x * y * (1 - x) * (1 - y) * std::sin(m * pi * x) * std::sin(n * pi * y);
    }
  }
  return 4.0 * sum * h * h / 9.0;
}

double end_error(double h, double t_end) {
  const LvParams p;
  const auto coarse = lv_rk4({h, t_end}, p, {1.0, 1.0}).back();
  const auto fine = lv_rk4({h / 64.0, t_end}, p, {1.0, 1.0}).back();
  return std::hypot(coarse.u - fine.u, coarse.v - fine.v);
}

}  // namespace

TEST_CASE("transport_exact") {
  const double a = pi / 10;
  for (double x = 0.0; x <= 1.0; x += 0.01) CHECK(transport_exact(0.0, x, a) == initial_transport(x));
  CHECK(transport_exact(1.0, 0.6, a) == doctest::Approx(4.47456321199168437e-4).epsilon(1e-12));
  CHECK(transport_exact(0.5, 0.05, a) == 0.0);
}

TEST_CASE("transport_exact solves the transport equation on the smooth region") {
  const double a = pi / 10, h = 1e-6;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    const double t = unit(rng), x = unit(rng);
    const double xi = x - a * t;
    if (std::abs(xi - 0.1) < 1e-3 || std::abs(xi - 0.5) < 1e-3) continue;  // kink set
    const double ut = (transport_exact(t + h, x, a) - transport_exact(t - h, x, a)) / (2 * h);
    const double ux = (transport_exact(t, x + h, a) - transport_exact(t, x - h, a)) / (2 * h);
    CHECK(std::abs(ut + a * ux) < 1e-6);
    ++checked;
  }
  CHECK(checked > 900);
}

TEST_CASE("fourier_coeff matches quadrature") {
  CHECK(std::abs(fourier_coeff(1, 1) - fourier_quadrature(1, 1)) / fourier_coeff(1, 1) < 1e-8);
  CHECK(std::abs(fourier_coeff(3, 3) - fourier_quadrature(3, 3)) / fourier_coeff(3, 3) < 1e-8);
  CHECK(fourier_coeff(1, 1) == doctest::Approx(0.0665703342909345).epsilon(1e-13));
  CHECK(fourier_coeff(3, 3) == doctest::Approx(9.13173309889363e-5).epsilon(1e-12));
  CHECK(fourier_coeff(2, 1) == 0.0);
  CHECK(std::abs(fourier_quadrature(2, 1)) < 1e-12);
  CHECK_THROWS_AS(fourier_coeff(0, 1), DomainError);
}

TEST_CASE("series truncation tail bound") {
  double prev = 1.0;
  for (int M = 1; M <= 41; M += 2) {
    const double tail = SeriesTruncation{M}.tail_bound();
    CHECK(tail < prev);
    CHECK(tail > 0.0);
    prev = tail;
  }
  // Direct sum of the discarded coefficients up to a large cutoff.
  double direct = 0.0;
  for (int m = 1; m <= 2001; m += 2) {
    for (int n = 1; n <= 2001; n += 2) {
      if (m > 19 || n > 19) direct += fourier_coeff(m, n);
    }
  }
  CHECK(SeriesTruncation{19}.tail_bound() == doctest::Approx(direct).epsilon(1e-3));
  CHECK_THROWS_AS(SeriesTruncation{4}.validate(), ConfigError);
}

TEST_CASE("heat_series") {
  for (double t : {0.0, 0.1, 0.7}) CHECK(heat_series(t, 0.0, 0.3, 1.0) == doctest::Approx(0.0).scale(1.0));
  CHECK(std::abs(heat_series(0.0, 0.5, 0.5, 1.0) - 0.0625) < 1e-4);
  for (double t : {0.5, 1.0, 2.0}) {
    const double bound = fourier_coeff(1, 1) * std::exp(-2 * pi * pi * t) + SeriesTruncation{19}.tail_bound();
    CHECK(std::abs(heat_series(t, 0.5, 0.5, 1.0)) <= bound);
  }
}

TEST_CASE("wave_series") {
  CHECK(std::abs(wave_series(0.0, 0.5, 0.5, 1.0) - 0.0625) < 1e-4);
  CHECK(std::abs(wave_series(0.4, 1.0, 0.2, 1.0)) < 1e-15);
  const double h = 1e-5;
  const double ut0 = (wave_series(h, 0.3, 0.6, 1.0) - wave_series(-h, 0.3, 0.6, 1.0)) / (2 * h);
  CHECK(std::abs(ut0) < 1e-6);
}

TEST_CASE("series satisfy their PDEs under finite differences") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  const double h = 1e-4;
  for (int i = 0; i < 50; ++i) {
    const double t = unit(rng), x = unit(rng), y = unit(rng);
    const auto lap = [&](auto f) {
      return (f(t, x + h, y) - 2 * f(t, x, y) + f(t, x - h, y)) / (h * h) +
             (f(t, x, y + h) - 2 * f(t, x, y) + f(t, x, y - h)) / (h * h);
    };
    const auto heat = [](double tt, double xx, double yy) { return heat_series(tt, xx, yy, 1.0); };
    const auto wave = [](double tt, double xx, double yy) { return wave_series(tt, xx, yy, 1.0); };
    const double heat_t = (heat(t + h, x, y) - heat(t - h, x, y)) / (2 * h);
    CHECK(std::abs(heat_t - lap(heat)) < 1e-4);
    const double wave_tt = (wave(t + h, x, y) - 2 * wave(t, x, y) + wave(t - h, x, y)) / (h * h);
    CHECK(std::abs(wave_tt - lap(wave)) < 1e-4);
  }
}

TEST_CASE("series_derivative agrees with finite differences") {
  const SeriesTruncation tr{19};
  const double t = 0.2, x = 0.3, y = 0.7, h = 1e-6;
  for (auto kind : {SeriesKind::heat, SeriesKind::wave}) {
    const auto f = [&](double tt, double xx, double yy) { return series_derivative(kind, tt, xx, yy, 1.0, tr, {}); };
    CHECK(series_derivative(kind, t, x, y, 1.0, tr, {1, 0, 0}) ==
          doctest::Approx((f(t + h, x, y) - f(t - h, x, y)) / (2 * h)).epsilon(1e-6));
    CHECK(series_derivative(kind, t, x, y, 1.0, tr, {0, 1, 0}) ==
          doctest::Approx((f(t, x + h, y) - f(t, x - h, y)) / (2 * h)).epsilon(1e-6));
    CHECK(series_derivative(kind, t, x, y, 1.0, tr, {0, 0, 1}) ==
          doctest::Approx((f(t, x, y + h) - f(t, x, y - h)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("lv_rk4: fixed point is stationary") {
  const auto traj = lv_rk4({0.01, 10.0}, LvParams{}, {0.25, 2.5});
  CHECK(traj.size() == 1001);
  for (const auto& s : traj) {
    CHECK(std::abs(s.u - 0.25) < 1e-12);
    CHECK(std::abs(s.v - 2.5) < 1e-12);
  }
}

TEST_CASE("lv_rk4: first integral is conserved over [0, 100]") {
  const LvParams p;
  const auto traj = lv_rk4({0.005, 100.0}, p, {1.0, 1.0});
  CHECK(traj.size() == 20001);
  CHECK(lv_first_integral(p, 1.0, 1.0) == doctest::Approx(0.8));
  double drift = 0.0;
  for (const auto& s : traj) drift = std::max(drift, std::abs(lv_first_integral(p, s.u, s.v) - 0.8));
  CHECK(drift < 1e-5);
}

TEST_CASE("lv_rk4: fourth-order convergence") {
  // Halving h from 0.01 to 0.005 against an h = 0.00125 reference.
  const LvParams p;
  const auto ref = lv_rk4({0.00125, 10.0}, p, {1.0, 1.0}).back();
  const auto e = [&](double h) {
    const auto s = lv_rk4({h, 10.0}, p, {1.0, 1.0}).back();
    return std::hypot(s.u - ref.u, s.v - ref.v);
  };
  const double ratio = e(0.01) / e(0.005);
  CHECK(ratio > 14.0);
  CHECK(ratio < 18.5);
  const double order = std::log2(end_error(0.02, 10.0) / end_error(0.01, 10.0));
  CHECK(order >= 3.9);
}

TEST_CASE("lv_rk4: errors") {
  CHECK_THROWS_AS(lv_rk4({0.0, 1.0}, LvParams{}, {1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(lv_rk4({0.3, 1.0}, LvParams{}, {1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(lv_rk4({0.1, 1.0}, LvParams{}, {0.0, 1.0}), ConfigError);
  // Explosive parameters: u' = 50 u with no predation, v' = 50 u v.
  try {
    lv_rk4({1.0, 100.0}, LvParams{50.0, 0.0, 50.0, 0.0}, {1.0, 1.0});
    FAIL("expected blow-up");
  } catch (const IntegratorError& e) {
    CHECK(e.step() > 0);
    CHECK(e.step() <= 100);
  }
}

TEST_CASE("LvSolution interpolates between nodes") {
  const LvParams p;
  const LvSolution coarse({0.01, 20.0}, p, {1.0, 1.0});
  const auto fine = lv_rk4({0.0005, 20.0}, p, {1.0, 1.0});
  for (std::size_t i = 1; i < fine.size(); i += 37) {
    const auto uv = coarse.value(fine[i].t);
    CHECK(std::abs(uv[0] - fine[i].u) < 1e-7);
    CHECK(std::abs(uv[1] - fine[i].v) < 1e-7);
    const auto d = coarse.derivative(fine[i].t);
    const auto f = lv_rhs(p, fine[i].u, fine[i].v);
    CHECK(std::abs(d[0] - f[0]) < 1e-5);
  }
  CHECK_THROWS_AS(coarse.value(20.5), DomainError);
}

TEST_CASE("grids") {
  const auto tr = make_problem(ProblemKind::transport1d);
  const auto g = default_grid(ProblemKind::transport1d);
  CHECK(g.size() == 1700);
  const auto pts = grid_points(tr, g);
  CHECK(pts.cols() == 1700);
  CHECK(pts(0, 0) == 0.0);
  CHECK(pts(1, 99) == 1.0);
  CHECK(pts(0, 100) == doctest::Approx(1.0 / 16));
  CHECK(grid_point(tr, g, 1699) == std::vector<double>{1.0, 1.0});
  const auto lv = make_problem(ProblemKind::lotka_volterra);
  const auto lg = default_grid(ProblemKind::lotka_volterra);
  CHECK(lg.size() == 20000);
  const auto axis = grid_axis(lv, lg, 0);
  CHECK(axis.front() == doctest::Approx(0.005));
  CHECK(axis.back() == 100.0);
  CHECK(default_grid(ProblemKind::heat2d).size() == 1000000);
}

TEST_CASE("generate_observations") {
  const auto tr = make_problem(ProblemKind::transport1d);
  const Oracle oracle(tr);
  const auto grid = default_grid(tr.kind);
  const auto obs = generate_observations(tr, oracle, grid, 17, 42);
  REQUIRE(obs.size() == 17);
  std::set<double> times;
  for (Eigen::Index k = 0; k < 17; ++k) {
    times.insert(obs.points(0, k));
    CHECK(obs.values(0, k) == transport_exact(obs.points(0, k), obs.points(1, k), tr.true_params[0]));
  }
  CHECK(times.size() == 17);  // one observation per time slice

  const auto again = generate_observations(tr, oracle, grid, 17, 42);
  CHECK(again.points == obs.points);
  CHECK(again.values == obs.values);

  const auto lv = make_problem(ProblemKind::lotka_volterra);
  const Oracle lv_oracle(lv);
  const auto lv_obs = generate_observations(lv, lv_oracle, default_grid(lv.kind), 40, 1);
  CHECK(lv_obs.size() == 40);
  CHECK(lv_obs.points.minCoeff() > 0.0);
  CHECK(lv_obs.points.maxCoeff() <= 100.0);
  CHECK(lv_obs.values.rows() == 2);

  CHECK_THROWS_AS(generate_observations(tr, oracle, grid, 1701, 1), ConfigError);

  const auto wave = make_problem(ProblemKind::wave2d);
  const auto w_obs = generate_observations(wave, Oracle(wave), default_grid(wave.kind), 61, 5);
  CHECK(w_obs.size() == 61);
  std::set<std::vector<double>> distinct;
  for (Eigen::Index k = 0; k < 61; ++k) distinct.insert({w_obs.points(0, k), w_obs.points(1, k), w_obs.points(2, k)});
  CHECK(distinct.size() == 61);
}

TEST_CASE("observation CSV round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "pinnforge_obs_test";
  std::filesystem::create_directories(dir);
  for (auto kind : {ProblemKind::heat2d, ProblemKind::lotka_volterra}) {
    const auto spec = make_problem(kind);
    const auto obs = generate_observations(spec, Oracle(spec), default_grid(kind), 13, 9);
    const auto path = dir / (std::string(to_string(kind)) + ".csv");
    write_observations_csv(obs, spec, path);
    const auto back = read_observations_csv(spec, path);
    CHECK(back.points == obs.points);
    CHECK(back.values == obs.values);
  }
  std::ifstream in(dir / "lotka_volterra.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,u,v");
  std::ifstream in2(dir / "heat2d.csv");
  std::getline(in2, header);
  CHECK(header == "t,x,y,value");
}
