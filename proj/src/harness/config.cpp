#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pinnforge/error.hpp"
#include "pinnforge/harness.hpp"

namespace pinnforge {

namespace {

using Json = nlohmann::json;

NetworkSpec make_network(std::size_t input_dim, std::vector<std::size_t> widths, std::vector<Activation> acts,
                         std::size_t output_dim) {
  NetworkSpec net{input_dim, {}};
  for (std::size_t i = 0; i < widths.size(); ++i) net.layers.push_back({widths[i], acts[i]});
  net.layers.push_back({output_dim, Activation::identity});
  return net;
}

Json grid_json(const GridSpec& g) { return g.counts; }

GridSpec grid_from(const Json& j) { return GridSpec{j.get<std::vector<std::size_t>>()}; }

Json optional_grid_json(const std::optional<GridSpec>& g) { return g ? grid_json(*g) : Json(nullptr); }

std::optional<GridSpec> optional_grid_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return grid_from(j);
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown field '" + key + "' in " + where);
  }
}

Json train_json(const TrainConfig& t) {
  return {{"epochs", t.epochs},
          {"lr", t.lr},
          {"param_lr", t.param_lr},
          {"batch_interior", t.batch_interior},
          {"batch_initial", t.batch_initial},
          {"batch_boundary", t.batch_boundary},
          {"mode", to_string(t.mode)},
          {"seed", t.seed},
          {"determinism", t.determinism},
          {"fixed_batches", t.fixed_batches},
          {"trace_every", t.trace_every},
          {"stop_loss", t.stop_loss ? Json(*t.stop_loss) : Json(nullptr)},
          {"divergence_limit", t.divergence_limit},
          {"collocation_grid", optional_grid_json(t.collocation_grid)},
          {"beta1", t.beta1},
          {"beta2", t.beta2},
          {"adam_eps", t.adam_eps}};
}

void read_train(const Json& j, TrainConfig& t) {
  check_keys(j, {"epochs", "lr", "param_lr", "batch_interior", "batch_initial", "batch_boundary", "mode", "seed",
                 "determinism", "fixed_batches", "trace_every", "stop_loss", "divergence_limit", "collocation_grid",
                 "beta1", "beta2", "adam_eps"},
             "train");
  const auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("epochs", t.epochs);
  get("lr", t.lr);
  get("param_lr", t.param_lr);
  get("batch_interior", t.batch_interior);
  get("batch_initial", t.batch_initial);
  get("batch_boundary", t.batch_boundary);
  if (j.contains("mode")) t.mode = mode_from_string(j.at("mode").get<std::string>());
  get("seed", t.seed);
  get("determinism", t.determinism);
  get("fixed_batches", t.fixed_batches);
  get("trace_every", t.trace_every);
  if (j.contains("stop_loss")) {
    t.stop_loss = j.at("stop_loss").is_null() ? std::nullopt : std::optional<double>(j.at("stop_loss").get<double>());
  }
  get("divergence_limit", t.divergence_limit);
  if (j.contains("collocation_grid")) t.collocation_grid = optional_grid_from(j.at("collocation_grid"));
  get("beta1", t.beta1);
  get("beta2", t.beta2);
  get("adam_eps", t.adam_eps);
}

Json network_json(const NetworkSpec& n) {
  Json layers = Json::array();
  for (const auto& l : n.layers) layers.push_back({{"width", l.width}, {"activation", to_string(l.activation)}});
  return {{"input_dim", n.input_dim}, {"layers", layers}};
}

NetworkSpec network_from(const Json& j) {
  check_keys(j, {"input_dim", "layers"}, "network");
  NetworkSpec n{j.at("input_dim").get<std::size_t>(), {}};
  for (const auto& l : j.at("layers")) {
    check_keys(l, {"width", "activation"}, "network layer");
    n.layers.push_back({l.at("width").get<std::size_t>(), activation_from_string(l.at("activation").get<std::string>())});
  }
  return n;
}

}  // namespace

ExperimentConfig default_config(ProblemKind kind) {
  const auto spec = make_problem(kind);
  ExperimentConfig cfg;
  cfg.problem = kind;
  cfg.grid = default_grid(kind);
  cfg.observation_count = default_observation_count(kind);
  cfg.param_init.assign(spec.param_names.size(), 1.0);
  cfg.train.mode = Mode::inverse;
  cfg.out_dir = std::filesystem::path("out") / std::string(spec.name());
  const auto in = spec.input_dim();
  const auto out = spec.output_dim;
  using A = Activation;
  switch (kind) {
    case ProblemKind::transport1d:
      cfg.network = make_network(in, {128, 256, 128}, {A::relu, A::relu, A::relu}, out);
      cfg.train.lr = 1e-5;
      cfg.train.epochs = 50000;
      break;
    case ProblemKind::heat2d:
      cfg.network = make_network(in, {128, 128}, {A::sin, A::sigmoid}, out);
      cfg.train.lr = 1e-5;
      cfg.train.epochs = 20000;
      break;
    case ProblemKind::wave2d:
      cfg.network = make_network(in, {128, 256, 128}, {A::sin, A::tanh, A::tanh}, out);
      cfg.train.lr = 1e-5;
      cfg.train.epochs = 20000;
      break;
    case ProblemKind::lotka_volterra:
      cfg.network = make_network(in, {64, 64}, {A::sin, A::sin}, out);
      cfg.train.lr = 1e-4;
      cfg.train.epochs = 50000;
      break;
  }
  return cfg;
}

void ExperimentConfig::validate() const {
  const auto spec = make_problem(problem);
  network.validate();
  if (network.input_dim != spec.input_dim() || network.output_dim() != spec.output_dim) {
    throw ConfigError("network " + std::to_string(network.input_dim) + "->" + std::to_string(network.output_dim()) +
                      " does not fit " + std::string(spec.name()) + " (" + std::to_string(spec.input_dim()) + "->" +
                      std::to_string(spec.output_dim) + ")");
  }
  if (param_init.size() != spec.param_names.size()) {
    throw ConfigError("param_init needs " + std::to_string(spec.param_names.size()) + " values");
  }
  for (const auto* g : {&grid, eval_grid ? &*eval_grid : nullptr, train.collocation_grid ? &*train.collocation_grid : nullptr}) {
    if (g == nullptr) continue;
    if (g->counts.size() != spec.input_dim()) throw ConfigError("grid needs " + std::to_string(spec.input_dim()) + " axes");
    for (auto c : g->counts) {
      if (c == 0) throw ConfigError("grid axes need at least one point");
    }
  }
  if (train.mode == Mode::inverse && observation_count == 0) throw ConfigError("inverse mode needs observations");
  if (observation_count > grid.size()) throw ConfigError("more observations than grid points");
  oracle.series.validate();
  train.validate();
}

std::string config_to_json(const ExperimentConfig& cfg) {
  Json j{{"problem", to_string(cfg.problem)},
         {"grid", grid_json(cfg.grid)},
         {"eval_grid", optional_grid_json(cfg.eval_grid)},
         {"observation_count", cfg.observation_count},
         {"observation_seed", cfg.observation_seed},
         {"network", network_json(cfg.network)},
         {"param_init", cfg.param_init},
         {"init_seed", cfg.init_seed},
         {"train", train_json(cfg.train)},
         {"oracle", {{"series_max_mode", cfg.oracle.series.max_mode}, {"rk4_step", cfg.oracle.rk4.step}}},
         {"out_dir", cfg.out_dir.string()}};
  return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("config")) j = j.at("config");
  try {
    check_keys(j,
               {"problem", "grid", "eval_grid", "observation_count", "observation_seed", "network", "param_init",
                "init_seed", "train", "oracle", "out_dir"},
               "config");
    if (!j.contains("problem")) throw ConfigError("config needs a 'problem' field");
    auto cfg = default_config(problem_from_string(j.at("problem").get<std::string>()));
    if (j.contains("grid")) cfg.grid = grid_from(j.at("grid"));
    if (j.contains("eval_grid")) cfg.eval_grid = optional_grid_from(j.at("eval_grid"));
    if (j.contains("observation_count")) cfg.observation_count = j.at("observation_count").get<std::size_t>();
    if (j.contains("observation_seed")) cfg.observation_seed = j.at("observation_seed").get<std::uint64_t>();
    if (j.contains("network")) cfg.network = network_from(j.at("network"));
    if (j.contains("param_init")) cfg.param_init = j.at("param_init").get<std::vector<double>>();
    if (j.contains("init_seed")) cfg.init_seed = j.at("init_seed").get<std::uint64_t>();
    if (j.contains("train")) read_train(j.at("train"), cfg.train);
    if (j.contains("oracle")) {
      const auto& o = j.at("oracle");
      check_keys(o, {"series_max_mode", "rk4_step"}, "oracle");
      if (o.contains("series_max_mode")) cfg.oracle.series.max_mode = o.at("series_max_mode").get<int>();
      if (o.contains("rk4_step")) cfg.oracle.rk4.step = o.at("rk4_step").get<double>();
    }
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    cfg.validate();
    return cfg;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad config field: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << config_to_json(cfg) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace pinnforge
