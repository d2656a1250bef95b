#include <algorithm>
#include <cmath>

#include "pinnforge/error.hpp"
#include "pinnforge/oracles.hpp"

namespace pinnforge {

std::size_t Rk4Config::steps() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("RK4 step must be positive");
  if (!(t_end > 0.0)) throw ConfigError("RK4 end time must be positive");
  const double n = t_end / step;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9 * std::max(1.0, n)) {
    throw ConfigError("RK4 step " + std::to_string(step) + " does not divide t_end " + std::to_string(t_end));
  }
  return static_cast<std::size_t>(rounded);
}

std::array<double, 2> lv_rhs(const LvParams& p, double u, double v) {
  return {p.alpha * u - p.beta * u * v, p.delta * u * v - p.gamma * v};
}

double lv_first_integral(const LvParams& p, double u, double v) {
  return p.delta * u - p.gamma * std::log(u) + p.beta * v - p.alpha * std::log(v);
}

std::vector<LvState> lv_rk4(const Rk4Config& config, const LvParams& params, std::array<double, 2> init) {
  const auto n = config.steps();
  if (!(init[0] > 0.0) || !(init[1] > 0.0)) throw ConfigError("Lotka-Volterra initial populations must be positive");
  const double h = config.t_end / static_cast<double>(n);
  std::vector<LvState> traj;
  traj.reserve(n + 1);
  double u = init[0], v = init[1];
  traj.push_back({0.0, u, v});
  for (std::size_t i = 1; i <= n; ++i) {
    const auto k1 = lv_rhs(params, u, v);
    const auto k2 = lv_rhs(params, u + 0.5 * h * k1[0], v + 0.5 * h * k1[1]);
    const auto k3 = lv_rhs(params, u + 0.5 * h * k2[0], v + 0.5 * h * k2[1]);
    const auto k4 = lv_rhs(params, u + h * k3[0], v + h * k3[1]);
    u += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    v += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    if (!std::isfinite(u) || !std::isfinite(v)) throw IntegratorError("Lotka-Volterra state is not finite", i);
    traj.push_back({static_cast<double>(i) * h, u, v});
  }
  return traj;
}

LvSolution::LvSolution(const Rk4Config& config, const LvParams& params, std::array<double, 2> init)
    : params_(params), step_(config.t_end / static_cast<double>(config.steps())), traj_(lv_rk4(config, params, init)) {}

std::size_t LvSolution::segment(double t) const {
  const double t_end = traj_.back().t;
  if (t < -1e-12 || t > t_end + 1e-9) {
    throw DomainError("LvSolution: t = " + std::to_string(t) + " outside [0, " + std::to_string(t_end) + "]");
  }
  const auto last = traj_.size() - 2;
  const auto i = static_cast<std::size_t>(std::max(0.0, std::floor(t / step_)));
  return std::min(i, last);
}

// Cubic Hermite on [t_i, t_{i+1}] with slopes f(u_i), f(u_{i+1}).
std::array<double, 2> LvSolution::value(double t) const {
  const auto i = segment(t);
  const auto& a = traj_[i];
  const auto& b = traj_[i + 1];
  const double s = (t - a.t) / step_;
  if (s == 0.0) return {a.u, a.v};
  if (s == 1.0) return {b.u, b.v};
  const auto fa = lv_rhs(params_, a.u, a.v);
  const auto fb = lv_rhs(params_, b.u, b.v);
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return {h00 * a.u + h10 * step_ * fa[0] + h01 * b.u + h11 * step_ * fb[0],
          h00 * a.v + h10 * step_ * fa[1] + h01 * b.v + h11 * step_ * fb[1]};
}

std::array<double, 2> LvSolution::derivative(double t) const {
  const auto i = segment(t);
  const auto& a = traj_[i];
  const auto& b = traj_[i + 1];
  const double s = (t - a.t) / step_;
  const auto fa = lv_rhs(params_, a.u, a.v);
  const auto fb = lv_rhs(params_, b.u, b.v);
  const double d00 = 6 * s * s - 6 * s;
  const double d10 = 3 * s * s - 4 * s + 1;
  const double d01 = -d00;
  const double d11 = 3 * s * s - 2 * s;
  return {(d00 * a.u + d01 * b.u) / step_ + d10 * fa[0] + d11 * fb[0],
          (d00 * a.v + d01 * b.v) / step_ + d10 * fa[1] + d11 * fb[1]};
}

}  // namespace pinnforge
