#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "json.hpp"
#include "pinnforge/error.hpp"
#include "pinnforge/harness.hpp"

namespace pinnforge {

using Eigen::Index;

namespace {

constexpr Index kEvalChunk = 4096;

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::string> coordinate_names(const ProblemSpec& spec) {
  std::vector<std::string> names{"t"};
  static const char* axes[] = {"x", "y", "z"};
  for (std::size_t d = 0; d < spec.spatial_dim(); ++d) names.emplace_back(axes[d]);
  return names;
}

void write_coordinates(std::ostream& out, const Eigen::MatrixXd& points, Index k) {
  for (Index d = 0; d < points.rows(); ++d) out << (d ? "," : "") << points(d, k);
}

}  // namespace

double ErrorReport::max_param_rel_error() const {
  double worst = 0.0;
  for (const auto& p : params) worst = std::max(worst, p.rel_error);
  return worst;
}

bool operator==(const ErrorReport& a, const ErrorReport& b) {
  const auto same = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && (x.array() == y.array()).all();
  };
  return a.grid == b.grid && a.output_names == b.output_names && same(a.points, b.points) &&
         same(a.network, b.network) && same(a.exact, b.exact) && a.max_abs == b.max_abs && a.rms == b.rms &&
         a.params == b.params;
}

ErrorReport evaluate(const ProblemSpec& spec, const MlpParams& params, const Oracle& oracle, const GridSpec& grid) {
  ErrorReport r;
  r.grid = grid;
  for (auto o : spec.observed_outputs) r.output_names.push_back(spec.output_names.at(o));
  r.points = grid_points(spec, grid);
  const auto n = r.points.cols();
  const auto n_out = static_cast<Index>(spec.observed_outputs.size());
  r.network.resize(n_out, n);
  r.exact.resize(n_out, n);

  for (Index start = 0; start < n; start += kEvalChunk) {
    const auto width = std::min(kEvalChunk, n - start);
    const BatchPass pass(params, r.points.middleCols(start, width), false);
    for (Index o = 0; o < n_out; ++o) {
      r.network.row(o).segment(start, width) = pass.outputs().value.row(static_cast<Index>(spec.observed_outputs[static_cast<std::size_t>(o)]));
    }
  }
  std::vector<double> point(static_cast<std::size_t>(r.points.rows()));
  double sum_sq = 0.0;
  for (Index k = 0; k < n; ++k) {
    for (std::size_t d = 0; d < point.size(); ++d) point[d] = r.points(static_cast<Index>(d), k);
    const auto exact = oracle.observed(point);
    for (Index o = 0; o < n_out; ++o) {
      r.exact(o, k) = exact[static_cast<std::size_t>(o)];
      const double e = r.abs_error(o, k);
      r.max_abs = std::max(r.max_abs, e);
      sum_sq += e * e;
    }
  }
  // NaN does not win std::max; make a non-finite network visible in the summary.
  if (!std::isfinite(sum_sq)) r.max_abs = sum_sq;
  r.rms = n == 0 ? 0.0 : std::sqrt(sum_sq / static_cast<double>(n * n_out));

  for (std::size_t i = 0; i < spec.param_names.size(); ++i) {
    const double est = params.model().values.at(i);
    const double truth = spec.true_params.at(i);
    r.params.push_back({spec.param_names[i], est, truth, std::abs(est - truth) / std::abs(truth)});
  }
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.config = cfg;
  result.spec = make_problem(cfg.problem);
  const auto& spec = result.spec;
  const Oracle oracle(spec, cfg.oracle);

  if (cfg.observation_count > 0) {
    result.observations = generate_observations(spec, oracle, cfg.grid, cfg.observation_count, cfg.observation_seed);
  }
  // The forward problem solves for known parameters.
  const auto p0 = cfg.train.mode == Mode::forward ? spec.true_params : cfg.param_init;
  const auto params = init_params(cfg.network, {spec.param_names, p0}, cfg.init_seed);
  const auto* obs = cfg.train.mode == Mode::inverse ? &result.observations : nullptr;
  result.training = train(spec, params, cfg.train, obs);
  result.report = evaluate(spec, result.training.params, oracle, cfg.evaluation_grid());
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

void emit_figure_data(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const auto& spec = result.spec;
  const auto& r = result.report;
  const auto coords = coordinate_names(spec);
  const bool single = r.output_names.size() == 1;
  const auto n_out = static_cast<Index>(r.output_names.size());

  {
    const auto path = dir / "solution.csv";
    auto out = open_csv(path);
    for (const auto& c : coords) out << c << ',';
    for (Index o = 0; o < n_out; ++o) {
      const auto& name = r.output_names[static_cast<std::size_t>(o)];
      out << (o ? "," : "") << name << "_nn," << name << "_exact," << (single ? "" : name + "_") << "abs_err";
    }
    out << '\n';
    for (Index k = 0; k < r.points.cols(); ++k) {
      write_coordinates(out, r.points, k);
      for (Index o = 0; o < n_out; ++o) out << ',' << r.network(o, k) << ',' << r.exact(o, k) << ',' << r.abs_error(o, k);
      out << '\n';
    }
    finish(out, path);
  }
  {
    const auto path = dir / "error_grid.csv";
    auto out = open_csv(path);
    for (const auto& c : coords) out << c << ',';
    for (Index o = 0; o < n_out; ++o) {
      out << (o ? "," : "") << (single ? "" : r.output_names[static_cast<std::size_t>(o)] + "_") << "abs_err";
    }
    out << '\n';
    for (Index k = 0; k < r.points.cols(); ++k) {
      write_coordinates(out, r.points, k);
      for (Index o = 0; o < n_out; ++o) out << ',' << r.abs_error(o, k);
      out << '\n';
    }
    finish(out, path);
  }
  const auto& trace = result.training.trace;
  {
    const auto path = dir / "loss.csv";
    auto out = open_csv(path);
    out << "epoch,loss_ge,loss_ic,loss_bc,loss_obs,loss_forward,loss_total\n";
    for (const auto& rec : trace.records) {
      const auto& l = rec.loss;
      out << rec.epoch << ',' << l.ge << ',' << l.ic << ',' << l.bc << ',' << l.obs << ',' << l.forward() << ','
          << l.total << '\n';
    }
    finish(out, path);
  }
  {
    const auto path = dir / "params.csv";
    auto out = open_csv(path);
    out << "epoch";
    for (const auto& name : spec.param_names) out << ',' << name << ',' << name << "_true";
    out << '\n';
    for (const auto& rec : trace.records) {
      out << rec.epoch;
      for (std::size_t i = 0; i < rec.model_params.size(); ++i) out << ',' << rec.model_params[i] << ',' << spec.true_params[i];
      out << '\n';
    }
    finish(out, path);
  }
  write_trace_csv(trace, dir / "trace.csv");
  if (!result.observations.empty()) write_observations_csv(result.observations, spec, dir / "observations.csv");
  save_checkpoint(result.training.params, dir / "checkpoint.json");

  nlohmann::json summary;
  summary["problem"] = spec.name();
  summary["mode"] = to_string(result.config.train.mode);
  summary["max_abs_error"] = r.max_abs;
  summary["rms_error"] = r.rms;
  summary["eval_grid"] = r.grid.counts;
  summary["params"] = nlohmann::json::array();
  for (const auto& p : r.params) {
    summary["params"].push_back({{"name", p.name}, {"estimate", p.estimate}, {"true", p.truth}, {"rel_error", p.rel_error}});
  }
  summary["seeds"] = {{"observation", result.config.observation_seed},
                      {"init", result.config.init_seed},
                      {"train", result.config.train.seed}};
  summary["epochs_run"] = result.training.epochs_run;
  summary["aborted"] = result.aborted();
  summary["abort_reason"] = result.training.abort_reason ? nlohmann::json(*result.training.abort_reason) : nlohmann::json();
  summary["seconds"] = result.seconds;
  summary["config"] = nlohmann::json::parse(config_to_json(result.config));
  const auto path = dir / "summary.json";
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  // Non-finite numbers are written as null.
  out << summary.dump(2) << '\n';
  finish(out, path);
}

GridSpec courant_grid(const ProblemSpec& spec, const GridSpec& base, double courant) {
  if (spec.kind != ProblemKind::transport1d) throw ConfigError("the Courant study applies to transport1d only");
  if (!(courant > 0.0) || !std::isfinite(courant)) throw ConfigError("Courant numbers must be positive");
  if (base.counts.size() != 2 || base.counts[1] < 2) throw ConfigError("Courant grid needs a 2-axis base grid");
  const auto nx = base.counts[1];
  const double dx = spec.space[0].length() / static_cast<double>(nx - 1);
  const double dt = courant * dx / spec.true_params[0];
  const auto intervals = std::max<long long>(1, std::llround(spec.t_end / dt));
  return GridSpec{{static_cast<std::size_t>(intervals) + 1, nx}};
}

double courant_number(const ProblemSpec& spec, const GridSpec& grid) {
  const double dt = spec.t_end / static_cast<double>(grid.counts.at(0) - 1);
  const double dx = spec.space.at(0).length() / static_cast<double>(grid.counts.at(1) - 1);
  return spec.true_params.at(0) * dt / dx;
}

std::vector<CflCase> cfl_study(const ExperimentConfig& base, const std::vector<double>& courant_numbers) {
  if (courant_numbers.empty()) throw ConfigError("cfl study needs at least one Courant number");
  if (base.problem != ProblemKind::transport1d) throw ConfigError("the Courant study applies to transport1d only");
  const auto spec = make_problem(base.problem);
  std::vector<GridSpec> grids;
  for (double c : courant_numbers) grids.push_back(courant_grid(spec, base.grid, c));

  std::vector<CflCase> cases;
  for (std::size_t i = 0; i < courant_numbers.size(); ++i) {
    auto cfg = base;
    cfg.train.collocation_grid = grids[i];
    cfg.eval_grid = grids[i];
    cases.push_back({courant_numbers[i], courant_number(spec, grids[i]), grids[i], run_experiment(cfg)});
  }
  return cases;
}

void write_cfl_csv(const std::vector<CflCase>& cases, const std::filesystem::path& path) {
  auto out = open_csv(path);
  out << "courant,courant_achieved,nt,nx,max_abs_error,rms_error,a_estimate,a_rel_error,epochs_run,aborted\n";
  for (const auto& c : cases) {
    const auto& r = c.result.report;
    out << c.requested << ',' << c.achieved << ',' << c.grid.counts[0] << ',' << c.grid.counts[1] << ',' << r.max_abs
        << ',' << r.rms << ',' << r.params.at(0).estimate << ',' << r.params.at(0).rel_error << ','
        << c.result.training.epochs_run << ',' << (c.result.aborted() ? 1 : 0) << '\n';
  }
  finish(out, path);
}

}  // namespace pinnforge
