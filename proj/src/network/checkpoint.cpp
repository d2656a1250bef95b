#include <fstream>

#include "json.hpp"
#include "pinnforge/error.hpp"
#include "pinnforge/network.hpp"

namespace pinnforge {

namespace {

constexpr const char* kFormat = "pinnforge-ckpt-v1";

using Json = nlohmann::json;

}  // namespace

void save_checkpoint(const MlpParams& params, const std::filesystem::path& path) {
  Json j;
  j["format"] = kFormat;
  j["input_dim"] = params.spec().input_dim;
  Json layers = Json::array();
  for (std::size_t l = 0; l < params.layer_count(); ++l) {
    const auto w = params.weight(l);
    std::vector<double> row_major;
    row_major.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) row_major.push_back(w(r, c));
    }
    const auto b = params.bias(l);
    layers.push_back({{"rows", w.rows()},
                      {"cols", w.cols()},
                      {"activation", to_string(params.spec().layers[l].activation)},
                      {"weights", row_major},
                      {"bias", std::vector<double>(b.data(), b.data() + b.size())}});
  }
  j["layers"] = std::move(layers);
  j["model_params"] = Json::array();
  for (std::size_t i = 0; i < params.model().size(); ++i) {
    j["model_params"].push_back({{"name", params.model().names[i]}, {"value", params.model().values[i]}});
  }

  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  // dump() writes doubles with round-trip precision.
  out << j.dump(1) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

MlpParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("checkpoint " + path.string() + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) {
      throw ConfigError("checkpoint " + path.string() + " has format '" + j.at("format").get<std::string>() +
                        "', expected " + kFormat);
    }
    NetworkSpec spec{j.at("input_dim").get<std::size_t>(), {}};
    for (const auto& layer : j.at("layers")) {
      spec.layers.push_back({layer.at("rows").get<std::size_t>(),
                             activation_from_string(layer.at("activation").get<std::string>())});
    }
    spec.validate();
    ModelParams model;
    for (const auto& p : j.at("model_params")) {
      model.names.push_back(p.at("name").get<std::string>());
      model.values.push_back(p.at("value").get<double>());
    }

    MlpParams params(spec, std::move(model));
    for (std::size_t l = 0; l < params.layer_count(); ++l) {
      const auto& layer = j.at("layers")[l];
      auto w = params.weight(l);
      const auto values = layer.at("weights").get<std::vector<double>>();
      const auto bias = layer.at("bias").get<std::vector<double>>();
      if (layer.at("cols").get<Eigen::Index>() != w.cols() || values.size() != static_cast<std::size_t>(w.size()) ||
          bias.size() != static_cast<std::size_t>(w.rows())) {
        throw ConfigError("checkpoint layer " + std::to_string(l + 1) + " does not match its declared shape");
      }
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = values[static_cast<std::size_t>(r * w.cols() + c)];
      }
      params.bias(l) = Eigen::Map<const Eigen::VectorXd>(bias.data(), w.rows());
    }
    return params;
  } catch (const Json::exception& e) {
    throw ConfigError("checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace pinnforge
