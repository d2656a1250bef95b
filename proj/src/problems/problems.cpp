#include "pinnforge/problems.hpp"

#include "pinnforge/error.hpp"

namespace pinnforge {

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::transport1d: return "transport1d";
    case ProblemKind::heat2d: return "heat2d";
    case ProblemKind::wave2d: return "wave2d";
    case ProblemKind::lotka_volterra: return "lotka_volterra";
  }
  return "transport1d";
}

ProblemKind problem_from_string(std::string_view name) {
  if (name == "transport1d") return ProblemKind::transport1d;
  if (name == "heat2d") return ProblemKind::heat2d;
  if (name == "wave2d") return ProblemKind::wave2d;
  if (name == "lotka_volterra") return ProblemKind::lotka_volterra;
  throw ConfigError("unknown problem '" + std::string(name) +
                    "' (expected transport1d, heat2d, wave2d or lotka_volterra)");
}

ProblemSpec make_problem(ProblemKind kind) {
  ProblemSpec spec;
  spec.kind = kind;
  switch (kind) {
    case ProblemKind::transport1d:
      spec.t_end = 1.0;
      spec.space = {{0.0, 1.0}};
      spec.output_dim = 1;
      spec.output_names = {"u"};
      spec.param_names = {"a"};
      spec.true_params = {std::numbers::pi / 10.0};
      spec.initial_outputs = {0};
      spec.boundary_outputs = {0};
      spec.observed_outputs = {0};
      spec.residual_size = 1;
      break;
    case ProblemKind::heat2d:
      spec.t_end = 1.0;
      spec.space = {{0.0, 1.0}, {0.0, 1.0}};
      spec.output_dim = 3;
      spec.output_names = {"u", "v1", "v2"};
      spec.param_names = {"a2"};
      spec.true_params = {1.0};
      spec.initial_outputs = {0};
      spec.boundary_outputs = {0};
      spec.observed_outputs = {0};
      spec.residual_size = 3;
      break;
    case ProblemKind::wave2d:
      spec.t_end = 1.0;
      spec.space = {{0.0, 1.0}, {0.0, 1.0}};
      spec.output_dim = 4;
      spec.output_names = {"u", "w", "v1", "v2"};
      spec.param_names = {"a2"};
      spec.true_params = {1.0};
      spec.initial_outputs = {0, 1};
      spec.boundary_outputs = {0};
      spec.observed_outputs = {0};
      spec.residual_size = 4;
      break;
    case ProblemKind::lotka_volterra:
      spec.t_end = 100.0;
      spec.space = {};
      spec.output_dim = 2;
      spec.output_names = {"u", "v"};
      spec.param_names = {"alpha", "beta", "delta", "gamma"};
      spec.true_params = {1.0, 0.4, 0.4, 0.1};
      spec.initial_outputs = {0, 1};
      spec.boundary_outputs = {};
      spec.observed_outputs = {0, 1};
      spec.residual_size = 2;
      break;
  }
  return spec;
}

double initial_transport(double x) {
  if (x < 0.1 || x > 0.5) return 0.0;
  const double s = std::sin(0.25 * std::numbers::pi * (x - 0.1));
  return s * s * s * s;
}

double initial_transport_dx(double x) {
  if (x < 0.1 || x > 0.5) return 0.0;
  const double theta = 0.25 * std::numbers::pi * (x - 0.1);
  const double s = std::sin(theta);
  return 4.0 * s * s * s * std::cos(theta) * 0.25 * std::numbers::pi;
}

std::array<double, 2> initial_wave(double x, double y) { return {x * y * (1.0 - x) * (1.0 - y), 0.0}; }

std::vector<double> initial_eval(const ProblemSpec& spec, std::span<const double> x) {
  if (x.size() != spec.spatial_dim()) throw ContractViolation("initial_eval: wrong spatial dimension");
  switch (spec.kind) {
    case ProblemKind::transport1d: return {initial_transport(x[0])};
    // The heat initial state reuses the wave displacement profile.
    case ProblemKind::heat2d: return {initial_wave(x[0], x[1])[0]};
    case ProblemKind::wave2d: {
      const auto iv = initial_wave(x[0], x[1]);
      return {iv[0], iv[1]};
    }
    case ProblemKind::lotka_volterra: return {1.0, 1.0};
  }
  return {};
}

std::vector<std::array<std::size_t, 2>> boundary_faces(const ProblemSpec& spec) {
  switch (spec.kind) {
    // Inflow side only (a > 0).
    case ProblemKind::transport1d: return {{0, 0}};
    case ProblemKind::heat2d:
    case ProblemKind::wave2d: return {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    case ProblemKind::lotka_volterra: return {};
  }
  return {};
}

bool on_boundary(const ProblemSpec& spec, std::span<const double> x, double tol) {
  if (x.size() != spec.spatial_dim()) return false;
  for (std::size_t d = 0; d < x.size(); ++d) {
    if (x[d] < spec.space[d].lo - tol || x[d] > spec.space[d].hi + tol) return false;
  }
  for (const auto& [axis, side] : boundary_faces(spec)) {
    const double wall = side == 0 ? spec.space[axis].lo : spec.space[axis].hi;
    if (std::abs(x[axis] - wall) <= tol) return true;
  }
  return false;
}

std::vector<double> boundary_eval(const ProblemSpec& spec, double t, std::span<const double> x) {
  if (!spec.has_boundary()) throw ContractViolation(std::string(spec.name()) + " has no spatial boundary");
  if (!on_boundary(spec, x)) throw ContractViolation("boundary_eval: point is not on a constrained boundary face");
  if (t < 0.0 || t > spec.t_end) throw ContractViolation("boundary_eval: time outside [0, T]");
  // Homogeneous Dirichlet data on every constrained face.
  return std::vector<double>(spec.boundary_outputs.size(), 0.0);
}

}  // namespace pinnforge
