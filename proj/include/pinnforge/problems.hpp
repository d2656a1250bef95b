#pragma once

// The four benchmark systems.
//
// Second-order equations are rewritten as first-order systems with auxiliary
// network outputs:
//   heat:  outputs (u, v1, v2) with v1 = u_x, v2 = u_y
//   wave:  outputs (u, w, v1, v2) with w = u_t, v1 = u_x, v2 = u_y
// and the consistency equations (v1 - u_x, ...) are part of the residual.
//
// Input coordinates are ordered (t, x[, y]).

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pinnforge/autodiff/jet.hpp"

namespace pinnforge {

enum class ProblemKind { transport1d, heat2d, wave2d, lotka_volterra };

std::string_view to_string(ProblemKind kind);
ProblemKind problem_from_string(std::string_view name);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double length() const { return hi - lo; }
};

struct ProblemSpec {
  ProblemKind kind = ProblemKind::transport1d;
  double t_end = 1.0;
  std::vector<Interval> space;  // empty for the ODE
  std::size_t output_dim = 1;
  std::vector<std::string> output_names;
  std::vector<std::string> param_names;
  std::vector<double> true_params;
  std::vector<std::size_t> initial_outputs;   // outputs constrained at t = 0
  std::vector<std::size_t> boundary_outputs;  // outputs constrained on the boundary
  std::vector<std::size_t> observed_outputs;  // outputs that observations measure
  std::size_t residual_size = 1;

  std::string_view name() const { return to_string(kind); }
  std::size_t input_dim() const { return 1 + space.size(); }
  std::size_t spatial_dim() const { return space.size(); }
  bool has_boundary() const { return !boundary_outputs.empty(); }
};

ProblemSpec make_problem(ProblemKind kind);
inline ProblemSpec make_problem(std::string_view name) { return make_problem(problem_from_string(name)); }

/// u_t + a u_x over basis (t, x).
template <class T>
T residual_transport(const ad::Jet<T>& u, const T& a) {
  return u.d(0) + a * u.d(1);
}

/// (u_t - a2 (v1_x + v2_y), v1 - u_x, v2 - u_y) over basis (t, x, y).
template <class T>
std::array<T, 3> residual_heat(const ad::Jet<T>& u, const ad::Jet<T>& v1, const ad::Jet<T>& v2, const T& a2) {
  return {u.d(0) - a2 * (v1.d(1) + v2.d(2)), v1.value() - u.d(1), v2.value() - u.d(2)};
}

/// (w_t - a2 (v1_x + v2_y), w - u_t, v1 - u_x, v2 - u_y) over basis (t, x, y).
template <class T>
std::array<T, 4> residual_wave(const ad::Jet<T>& u, const ad::Jet<T>& w, const ad::Jet<T>& v1, const ad::Jet<T>& v2,
                               const T& a2) {
  return {w.d(0) - a2 * (v1.d(1) + v2.d(2)), w.value() - u.d(0), v1.value() - u.d(1), v2.value() - u.d(2)};
}

/// (u' - alpha u + beta u v, v' - delta u v + gamma v) over basis (t).
template <class T>
std::array<T, 2> residual_lv(const ad::Jet<T>& u, const ad::Jet<T>& v, const T& alpha, const T& beta, const T& delta,
                             const T& gamma) {
  const T uv = u.value() * v.value();
  return {u.d(0) - alpha * u.value() + beta * uv, v.d(0) - delta * uv + gamma * v.value()};
}

/// Residual components of `spec` for one collocation point. `outputs` are the
/// network outputs as jets over the input basis; `p` follows
/// `spec.param_names`.
template <class T>
std::vector<T> residual(const ProblemSpec& spec, std::span<const ad::Jet<T>> outputs, std::span<const T> p) {
  if (outputs.size() != spec.output_dim || p.size() != spec.param_names.size()) {
    throw ContractViolation("residual: expected " + std::to_string(spec.output_dim) + " outputs and " +
                            std::to_string(spec.param_names.size()) + " parameters");
  }
  for (const auto& o : outputs) {
    if (o.dim() != spec.input_dim()) throw ContractViolation("residual: output jets use the wrong input basis");
  }
  switch (spec.kind) {
    case ProblemKind::transport1d: return {residual_transport(outputs[0], p[0])};
    case ProblemKind::heat2d: {
      const auto r = residual_heat(outputs[0], outputs[1], outputs[2], p[0]);
      return {r.begin(), r.end()};
    }
    case ProblemKind::wave2d: {
      const auto r = residual_wave(outputs[0], outputs[1], outputs[2], outputs[3], p[0]);
      return {r.begin(), r.end()};
    }
    case ProblemKind::lotka_volterra: {
      const auto r = residual_lv(outputs[0], outputs[1], p[0], p[1], p[2], p[3]);
      return {r.begin(), r.end()};
    }
  }
  return {};
}

/// sin^4(0.25 pi (x - 0.1)) on [0.1, 0.5], zero elsewhere.
double initial_transport(double x);

/// d/dx of `initial_transport` (zero outside the support).
double initial_transport_dx(double x);

/// (u0, w0) = (x y (1-x)(1-y), 0).
std::array<double, 2> initial_wave(double x, double y);

/// Targets for `spec.initial_outputs` at the spatial point `x` (t = 0).
std::vector<double> initial_eval(const ProblemSpec& spec, std::span<const double> x);

/// Targets for `spec.boundary_outputs` at (t, x) with x on the boundary.
/// Throws ContractViolation when x is not on the (constrained) boundary.
std::vector<double> boundary_eval(const ProblemSpec& spec, double t, std::span<const double> x);

/// True when `x` lies on a constrained boundary face of `spec`.
bool on_boundary(const ProblemSpec& spec, std::span<const double> x, double tol = 1e-12);

/// Faces carrying boundary data, as (axis, side) with side 0 = lo, 1 = hi.
std::vector<std::array<std::size_t, 2>> boundary_faces(const ProblemSpec& spec);

}  // namespace pinnforge
