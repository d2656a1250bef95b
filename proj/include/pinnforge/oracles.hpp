#pragma once

// Reference solutions for the benchmark problems and the observation data
// drawn from them:
//  * transport: method of characteristics, u(t, x) = f(x - a t)
//  * heat, wave: truncated double sine series over odd modes
//  * Lotka-Volterra: classical fixed-step RK4

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "pinnforge/autodiff/jet.hpp"
#include "pinnforge/problems.hpp"

namespace pinnforge {

double transport_exact(double t, double x, double a);

/// Fourier-sine coefficient of x y (1-x)(1-y): 64 / (m^3 n^3 pi^6) for odd m, n.
double fourier_coeff(int m, int n);

/// Series over modes m, n in {1, 3, ..., max_mode}.
struct SeriesTruncation {
  int max_mode = 19;

  void validate() const;
  /// Sum of |c_mn| over the discarded modes; bounds the pointwise error at t = 0.
  double tail_bound() const;
};

enum class SeriesKind { heat, wave };

/// Order of differentiation along (t, x, y).
struct DerivativeOrder {
  int t = 0;
  int x = 0;
  int y = 0;
};

/// Term-by-term partial derivative of the heat or wave series.
double series_derivative(SeriesKind kind, double t, double x, double y, double a2, const SeriesTruncation& trunc,
                         DerivativeOrder order);

double heat_series(double t, double x, double y, double a2, const SeriesTruncation& trunc = {});
double wave_series(double t, double x, double y, double a2, const SeriesTruncation& trunc = {});

struct Rk4Config {
  double step = 0.005;
  double t_end = 100.0;

  /// Number of steps; throws ConfigError unless `step` divides `t_end`.
  std::size_t steps() const;
};

struct LvParams {
  double alpha = 1.0;
  double beta = 0.4;
  double delta = 0.4;
  double gamma = 0.1;
};

struct LvState {
  double t = 0.0;
  double u = 0.0;
  double v = 0.0;
};

/// Right-hand side of the Lotka-Volterra system.
std::array<double, 2> lv_rhs(const LvParams& p, double u, double v);

/// Conserved quantity delta u - gamma ln u + beta v - alpha ln v.
double lv_first_integral(const LvParams& p, double u, double v);

/// Classical RK4 trajectory with steps() + 1 states, starting at t = 0.
/// Throws IntegratorError naming the step at which the state became non-finite.
std::vector<LvState> lv_rk4(const Rk4Config& config, const LvParams& params, std::array<double, 2> init);

/// Continuous RK4 solution: nodal values, cubic Hermite interpolation between
/// nodes using the vector field for slopes.
class LvSolution {
 public:
  LvSolution(const Rk4Config& config, const LvParams& params, std::array<double, 2> init);

  std::array<double, 2> value(double t) const;
  std::array<double, 2> derivative(double t) const;
  const std::vector<LvState>& trajectory() const noexcept { return traj_; }
  const LvParams& params() const noexcept { return params_; }

 private:
  std::size_t segment(double t) const;

  LvParams params_;
  double step_;
  std::vector<LvState> traj_;
};

/// Tunables for the reference solutions.
struct OracleSettings {
  SeriesTruncation series{};
  Rk4Config rk4{};
};

/// Reference solution of a problem at its true parameters.
class Oracle {
 public:
  explicit Oracle(const ProblemSpec& spec, const OracleSettings& settings = {});

  const ProblemSpec& spec() const noexcept { return spec_; }

  /// Observed outputs (spec.observed_outputs) at a point (t, x[, y]).
  std::vector<double> observed(std::span<const double> point) const;

  /// Every network output, auxiliaries included, as exact jets over (t, x[, y]).
  std::vector<ad::Jet<double>> jets(std::span<const double> point) const;

 private:
  ProblemSpec spec_;
  OracleSettings settings_;
  std::shared_ptr<const LvSolution> lv_;
};

/// Evaluation/observation grid: one count per input axis (t, x[, y]).
///
/// PDE axes are uniform and include both end points. The ODE time axis holds
/// the integrator nodes after t = 0: t_i = i T / n, i = 1..n.
struct GridSpec {
  std::vector<std::size_t> counts;

  std::size_t size() const;
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Table grid of each benchmark: 17 x 100, 100^3, 100^3, 20000.
GridSpec default_grid(ProblemKind kind);

std::vector<double> grid_axis(const ProblemSpec& spec, const GridSpec& grid, std::size_t axis);

/// All grid points, input_dim x size(), with the last axis varying fastest.
Eigen::MatrixXd grid_points(const ProblemSpec& spec, const GridSpec& grid);

/// Coordinates of grid point `index` in the ordering of `grid_points`.
std::vector<double> grid_point(const ProblemSpec& spec, const GridSpec& grid, std::size_t index);

/// Data set D of (point, observed values) pairs.
struct ObservationSet {
  std::size_t input_dim = 1;
  std::vector<std::size_t> outputs;  // network outputs the values correspond to
  Eigen::MatrixXd points;            // input_dim x k
  Eigen::MatrixXd values;            // outputs.size() x k

  std::size_t size() const { return static_cast<std::size_t>(points.cols()); }
  bool empty() const { return size() == 0; }
};

/// Samples `count` grid points without replacement and attaches oracle
/// values. For the transport problem, when count <= time slices, each point
/// comes from a distinct time slice.
ObservationSet generate_observations(const ProblemSpec& spec, const Oracle& oracle, const GridSpec& grid,
                                     std::size_t count, std::uint64_t seed);

/// Default observation counts: 17, 13, 61, 40.
std::size_t default_observation_count(ProblemKind kind);

/// CSV with header `t,x[,y],value` (ODE: `t,u,v`), 17 significant digits.
void write_observations_csv(const ObservationSet& obs, const ProblemSpec& spec, const std::filesystem::path& path);
ObservationSet read_observations_csv(const ProblemSpec& spec, const std::filesystem::path& path);

}  // namespace pinnforge
