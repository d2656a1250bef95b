// pinnforge: run the benchmark experiments, the Courant-number study, or the
// invariant suite.
//
// Exit codes: 0 success, 1 I/O or failed check, 2 config error, 3 numeric abort.

#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pinnforge/error.hpp"
#include "pinnforge/harness.hpp"

namespace {

using namespace pinnforge;

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kConfigError = 2;
constexpr int kNumericAbort = 3;

struct RunOptions {
  std::string problem;
  std::string mode;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
};

ExperimentConfig resolve(const RunOptions& o) {
  ExperimentConfig cfg;
  if (!o.config.empty()) {
    cfg = load_config(o.config);
    if (!o.problem.empty() && problem_from_string(o.problem) != cfg.problem) {
      throw ConfigError("--problem " + o.problem + " disagrees with the config file (" +
                        std::string(to_string(cfg.problem)) + ")");
    }
  } else if (!o.problem.empty()) {
    cfg = default_config(problem_from_string(o.problem));
  } else {
    throw ConfigError("give --problem or --config");
  }
  if (!o.mode.empty()) cfg.train.mode = mode_from_string(o.mode);
  if (o.epochs) cfg.train.epochs = *o.epochs;
  if (o.seed) {
    cfg.train.seed = *o.seed;
    cfg.init_seed = *o.seed;
  }
  if (!o.out.empty()) cfg.out_dir = o.out;
  cfg.validate();
  return cfg;
}

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--mode", o.mode, "forward or inverse")->check(CLI::IsMember({"forward", "inverse"}));
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_option("--seed", o.seed, "seed for initialization and batch sampling");
  cmd->add_option("--config", o.config, "JSON experiment config (or a previous summary.json)");
  cmd->add_option("--out", o.out, "output directory");
}

void print_report(const ExperimentResult& r) {
  std::printf("%s %s: max abs error %.6e, rms %.6e, %zu epochs, %.1f s\n", std::string(r.spec.name()).c_str(),
              std::string(to_string(r.config.train.mode)).c_str(), r.report.max_abs, r.report.rms,
              r.training.epochs_run, r.seconds);
  for (const auto& p : r.report.params) {
    std::printf("  %-6s estimate %.8g  true %.8g  rel error %.3e\n", p.name.c_str(), p.estimate, p.truth, p.rel_error);
  }
  if (r.training.abort_reason) std::printf("  aborted: %s\n", r.training.abort_reason->c_str());
}

int cmd_run(const RunOptions& o) {
  const auto cfg = resolve(o);
  const auto result = run_experiment(cfg);
  emit_figure_data(result, cfg.out_dir);
  print_report(result);
  std::printf("artifacts in %s\n", cfg.out_dir.string().c_str());
  return result.aborted() ? kNumericAbort : kOk;
}

std::vector<double> parse_courant(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError("bad Courant number '" + item + "'");
    }
  }
  return out;
}

int cmd_cfl(RunOptions o, const std::string& courant) {
  if (o.problem.empty() && o.config.empty()) o.problem = "transport1d";
  const auto cfg = resolve(o);
  const auto cases = cfl_study(cfg, parse_courant(courant));
  bool aborted = false;
  for (const auto& c : cases) {
    std::ostringstream name;
    name << "courant_" << c.requested;
    emit_figure_data(c.result, cfg.out_dir / name.str());
    std::printf("C = %g (achieved %.4f, grid %zux%zu): ", c.requested, c.achieved, c.grid.counts[0], c.grid.counts[1]);
    print_report(c.result);
    aborted = aborted || c.result.aborted();
  }
  write_cfl_csv(cases, cfg.out_dir / "cfl.csv");
  std::printf("study table in %s\n", (cfg.out_dir / "cfl.csv").string().c_str());
  return aborted ? kNumericAbort : kOk;
}

int cmd_check() {
  bool ok = true;
  for (const auto& c : run_checks()) {
    std::printf("%s  %-48s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    ok = ok && c.passed;
  }
  return ok ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physics-informed network solver for forward and inverse differential-equation problems"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "train one experiment and write its artifacts");
  run->add_option("--problem", run_opts.problem, "transport1d | heat2d | wave2d | lotka_volterra");
  add_run_options(run, run_opts);

  RunOptions cfl_opts;
  std::string courant = "0.5,1.5,3,6";
  auto* cfl = app.add_subcommand("cfl", "transport runs at several Courant numbers");
  cfl->add_option("--courant", courant, "comma-separated Courant numbers")->capture_default_str();
  add_run_options(cfl, cfl_opts);

  auto* check = app.add_subcommand("check", "gradient checks, reference residuals and RK4 order");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; malformed options are configuration errors.
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*cfl) return cmd_cfl(cfl_opts, courant);
    if (*check) return cmd_check();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kNumericAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
