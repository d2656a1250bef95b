#include <algorithm>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "pinnforge/error.hpp"
#include "pinnforge/oracles.hpp"

namespace pinnforge {

namespace {

LvParams lv_params(const ProblemSpec& spec) {
  const auto& p = spec.true_params;
  return {p.at(0), p.at(1), p.at(2), p.at(3)};
}

// Selection sampling: k of {0, ..., n-1} in increasing order.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  std::vector<std::size_t> out;
  out.reserve(k);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < n && out.size() < k; ++i) {
    const auto remaining = static_cast<double>(n - i);
    const auto needed = static_cast<double>(k - out.size());
    if (remaining * unit(rng) < needed) out.push_back(i);
  }
  return out;
}

SeriesKind series_kind(const ProblemSpec& spec) {
  return spec.kind == ProblemKind::heat2d ? SeriesKind::heat : SeriesKind::wave;
}

}  // namespace

Oracle::Oracle(const ProblemSpec& spec, const OracleSettings& settings) : spec_(spec), settings_(settings) {
  settings_.series.validate();
  if (spec_.kind == ProblemKind::lotka_volterra) {
    Rk4Config rk4 = settings_.rk4;
    rk4.t_end = spec_.t_end;
    const auto init = initial_eval(spec_, {});
    lv_ = std::make_shared<const LvSolution>(rk4, lv_params(spec_), std::array<double, 2>{init[0], init[1]});
  }
}

std::vector<double> Oracle::observed(std::span<const double> point) const {
  if (point.size() != spec_.input_dim()) throw ContractViolation("Oracle: point has the wrong dimension");
  switch (spec_.kind) {
    case ProblemKind::transport1d: return {transport_exact(point[0], point[1], spec_.true_params[0])};
    case ProblemKind::heat2d:
      return {heat_series(point[0], point[1], point[2], spec_.true_params[0], settings_.series)};
    case ProblemKind::wave2d:
      return {wave_series(point[0], point[1], point[2], spec_.true_params[0], settings_.series)};
    case ProblemKind::lotka_volterra: {
      const auto uv = lv_->value(point[0]);
      return {uv[0], uv[1]};
    }
  }
  return {};
}

std::vector<ad::Jet<double>> Oracle::jets(std::span<const double> point) const {
  if (point.size() != spec_.input_dim()) throw ContractViolation("Oracle: point has the wrong dimension");
  using J = ad::Jet<double>;
  switch (spec_.kind) {
    case ProblemKind::transport1d: {
      const double a = spec_.true_params[0];
      const double xi = point[1] - a * point[0];
      const double slope = initial_transport_dx(xi);
      return {J(initial_transport(xi), {-a * slope, slope})};
    }
    case ProblemKind::heat2d:
    case ProblemKind::wave2d: {
      const auto kind = series_kind(spec_);
      const double t = point[0], x = point[1], y = point[2];
      const double a2 = spec_.true_params[0];
      const auto d = [&](int ot, int ox, int oy) {
        return series_derivative(kind, t, x, y, a2, settings_.series, {ot, ox, oy});
      };
      // Jet of the field with derivative orders (ot, ox, oy) over (t, x, y).
      const auto field = [&](int ot, int ox, int oy) {
        return J(d(ot, ox, oy), {d(ot + 1, ox, oy), d(ot, ox + 1, oy), d(ot, ox, oy + 1)});
      };
      if (kind == SeriesKind::heat) return {field(0, 0, 0), field(0, 1, 0), field(0, 0, 1)};
      return {field(0, 0, 0), field(1, 0, 0), field(0, 1, 0), field(0, 0, 1)};
    }
    case ProblemKind::lotka_volterra: {
      const auto uv = lv_->value(point[0]);
      const auto duv = lv_->derivative(point[0]);
      return {J(uv[0], {duv[0]}), J(uv[1], {duv[1]})};
    }
  }
  return {};
}

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (auto c : counts) n *= c;
  return counts.empty() ? 0 : n;
}

GridSpec default_grid(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::transport1d: return {{17, 100}};
    case ProblemKind::heat2d:
    case ProblemKind::wave2d: return {{100, 100, 100}};
    case ProblemKind::lotka_volterra: return {{20000}};
  }
  return {};
}

std::size_t default_observation_count(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::transport1d: return 17;
    case ProblemKind::heat2d: return 13;
    case ProblemKind::wave2d: return 61;
    case ProblemKind::lotka_volterra: return 40;
  }
  return 0;
}

std::vector<double> grid_axis(const ProblemSpec& spec, const GridSpec& grid, std::size_t axis) {
  if (grid.counts.size() != spec.input_dim()) {
    throw ConfigError("grid for " + std::string(spec.name()) + " needs " + std::to_string(spec.input_dim()) + " axes");
  }
  const auto n = grid.counts.at(axis);
  if (n == 0) throw ConfigError("grid axis " + std::to_string(axis) + " has no points");
  std::vector<double> out(n);
  if (spec.spatial_dim() == 0) {
    // ODE: integrator nodes after the initial time.
    for (std::size_t i = 0; i < n; ++i) out[i] = spec.t_end * static_cast<double>(i + 1) / static_cast<double>(n);
    return out;
  }
  const Interval range = axis == 0 ? Interval{0.0, spec.t_end} : spec.space[axis - 1];
  if (n == 1) {
    out[0] = range.lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = range.lo + range.length() * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = range.hi;
  return out;
}

std::vector<double> grid_point(const ProblemSpec& spec, const GridSpec& grid, std::size_t index) {
  std::vector<double> p(grid.counts.size());
  for (std::size_t axis = grid.counts.size(); axis-- > 0;) {
    const auto n = grid.counts[axis];
    const auto i = index % n;
    index /= n;
    const auto values = grid_axis(spec, grid, axis);
    p[axis] = values[i];
  }
  return p;
}

Eigen::MatrixXd grid_points(const ProblemSpec& spec, const GridSpec& grid) {
  const auto dims = grid.counts.size();
  std::vector<std::vector<double>> axes;
  for (std::size_t a = 0; a < dims; ++a) axes.push_back(grid_axis(spec, grid, a));
  const auto total = grid.size();
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(dims), static_cast<Eigen::Index>(total));
  std::vector<std::size_t> idx(dims, 0);
  for (std::size_t k = 0; k < total; ++k) {
    for (std::size_t a = 0; a < dims; ++a) pts(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k)) = axes[a][idx[a]];
    for (std::size_t a = dims; a-- > 0;) {
      if (++idx[a] < grid.counts[a]) break;
      idx[a] = 0;
    }
  }
  return pts;
}

ObservationSet generate_observations(const ProblemSpec& spec, const Oracle& oracle, const GridSpec& grid,
                                     std::size_t count, std::uint64_t seed) {
  const auto total = grid.size();
  if (count > total) {
    throw ConfigError("requested " + std::to_string(count) + " observations from a grid of " + std::to_string(total) +
                      " points");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> chosen;
  chosen.reserve(count);
  const auto per_slice = total / grid.counts.at(0);
  if (spec.kind == ProblemKind::transport1d && count <= grid.counts[0]) {
    const auto slices = sample_indices(grid.counts[0], count, rng);
    std::uniform_int_distribution<std::size_t> within(0, per_slice - 1);
    for (auto s : slices) chosen.push_back(s * per_slice + within(rng));
  } else {
    chosen = sample_indices(total, count, rng);
  }

  ObservationSet obs;
  obs.input_dim = spec.input_dim();
  obs.outputs = spec.observed_outputs;
  obs.points.resize(static_cast<Eigen::Index>(obs.input_dim), static_cast<Eigen::Index>(count));
  obs.values.resize(static_cast<Eigen::Index>(obs.outputs.size()), static_cast<Eigen::Index>(count));
  for (std::size_t k = 0; k < count; ++k) {
    const auto p = grid_point(spec, grid, chosen[k]);
    const auto v = oracle.observed(p);
    const auto col = static_cast<Eigen::Index>(k);
    for (std::size_t d = 0; d < p.size(); ++d) obs.points(static_cast<Eigen::Index>(d), col) = p[d];
    for (std::size_t o = 0; o < v.size(); ++o) {
      if (!std::isfinite(v[o])) throw NumericError("oracle produced a non-finite observation");
      obs.values(static_cast<Eigen::Index>(o), col) = v[o];
    }
  }
  return obs;
}

namespace {

std::vector<std::string> csv_header(const ProblemSpec& spec) {
  std::vector<std::string> cols{"t"};
  static const char* axes[] = {"x", "y", "z"};
  for (std::size_t d = 0; d < spec.spatial_dim(); ++d) cols.emplace_back(axes[d]);
  if (spec.observed_outputs.size() == 1) {
    cols.emplace_back("value");
  } else {
    for (auto o : spec.observed_outputs) cols.push_back(spec.output_names.at(o));
  }
  return cols;
}

}  // namespace

void write_observations_csv(const ObservationSet& obs, const ProblemSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const auto header = csv_header(spec);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n' << std::setprecision(17);
  for (Eigen::Index k = 0; k < obs.points.cols(); ++k) {
    for (Eigen::Index d = 0; d < obs.points.rows(); ++d) out << (d ? "," : "") << obs.points(d, k);
    for (Eigen::Index o = 0; o < obs.values.rows(); ++o) out << ',' << obs.values(o, k);
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

ObservationSet read_observations_csv(const ProblemSpec& spec, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  const auto header = csv_header(spec);
  std::string expected;
  for (std::size_t i = 0; i < header.size(); ++i) expected += (i ? "," : "") + header[i];
  if (line != expected) throw ConfigError("observation CSV header '" + line + "', expected '" + expected + "'");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != header.size()) throw ConfigError("observation CSV row has " + std::to_string(row.size()) + " fields");
    rows.push_back(std::move(row));
  }
  ObservationSet obs;
  obs.input_dim = spec.input_dim();
  obs.outputs = spec.observed_outputs;
  const auto k = static_cast<Eigen::Index>(rows.size());
  obs.points.resize(static_cast<Eigen::Index>(obs.input_dim), k);
  obs.values.resize(static_cast<Eigen::Index>(obs.outputs.size()), k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const auto& row = rows[static_cast<std::size_t>(c)];
    for (std::size_t d = 0; d < obs.input_dim; ++d) obs.points(static_cast<Eigen::Index>(d), c) = row[d];
    for (std::size_t o = 0; o < obs.outputs.size(); ++o) obs.values(static_cast<Eigen::Index>(o), c) = row[obs.input_dim + o];
  }
  return obs;
}

}  // namespace pinnforge
