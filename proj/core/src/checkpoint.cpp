#include "collapse/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "collapse/error.hpp"

namespace collapse {

using nlohmann::json;

namespace {

json mlp_to_json(const Mlp& net) {
  json layers = json::array();
  for (int l = 0; l < net.layers(); ++l) {
    const auto& w = net.weights[l];
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) flat.push_back(w(i, j));
    std::vector<double> bias(net.biases[l].data(), net.biases[l].data() + net.biases[l].size());
    layers.push_back({{"weights", flat}, {"bias", bias}});
  }
  return {{"widths", net.widths}, {"activation", activation_name(net.activation)}, {"layers", layers}};
}

json model_to_json(const ScoreModel& m) {
  json j = mlp_to_json(m.inner);
  j["skip_mode"] = skip_mode_name(m.skip);
  j["swap_fixed"] = m.swap_fixed;
  j["precision"] = precision_name(m.precision);
  j["schedule"] = {{"schedule", m.schedule.name()},
                   {"beta_min", m.schedule.beta_min()},
                   {"beta_max", m.schedule.beta_max()}};
  if (m.c1 && m.c2) j["skip_nets"] = {{"c1", mlp_to_json(*m.c1)}, {"c2", mlp_to_json(*m.c2)}};
  return j;
}

// Looks up `key`, reporting the dotted path on failure.
const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw LoadError(fmt::format("checkpoint: missing field '{}{}'", path, key));
  }
  return obj.at(key);
}

template <typename T>
T get_as(const json& obj, const std::string& key, const std::string& path) {
  const json& value = field(obj, key, path);
  try {
    return value.get<T>();
  } catch (const json::exception& e) {
    throw LoadError(fmt::format("checkpoint: field '{}{}' has the wrong type: {}", path, key, e.what()));
  }
}

Mlp mlp_from_json(const json& j, const std::string& path) {
  const auto widths = get_as<std::vector<int>>(j, "widths", path);
  const auto act_name = get_as<std::string>(j, "activation", path);
  Mlp net;
  try {
    net = Mlp::zeros(widths, activation_from_name(act_name));
  } catch (const ParameterError& e) {
    throw LoadError(fmt::format("checkpoint: '{}widths'/'{}activation': {}", path, path, e.what()));
  }
  const json& layers = field(j, "layers", path);
  if (!layers.is_array() || static_cast<int>(layers.size()) != net.layers()) {
    throw LoadError(fmt::format("checkpoint: '{}layers' must list {} layers", path, net.layers()));
  }
  for (int l = 0; l < net.layers(); ++l) {
    const std::string lpath = fmt::format("{}layers[{}].", path, l);
    const auto w = get_as<std::vector<double>>(layers[l], "weights", lpath);
    const auto b = get_as<std::vector<double>>(layers[l], "bias", lpath);
    auto& wm = net.weights[l];
    if (static_cast<Eigen::Index>(w.size()) != wm.size()) {
      throw LoadError(fmt::format("checkpoint: '{}weights' has {} entries, expected {}", lpath, w.size(), wm.size()));
    }
    if (static_cast<Eigen::Index>(b.size()) != net.biases[l].size()) {
      throw LoadError(fmt::format("checkpoint: '{}bias' has {} entries, expected {}", lpath, b.size(),
                                  net.biases[l].size()));
    }
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < wm.rows(); ++r)
      for (Eigen::Index c = 0; c < wm.cols(); ++c) wm(r, c) = w[k++];
    for (std::size_t i = 0; i < b.size(); ++i) net.biases[l][static_cast<Eigen::Index>(i)] = b[i];
  }
  return net;
}

ScoreModel model_from_json(const json& j, const std::string& path) {
  ScoreModel m;
  m.inner = mlp_from_json(j, path);
  try {
    m.skip = skip_mode_from_name(get_as<std::string>(j, "skip_mode", path));
    m.precision = precision_from_name(get_as<std::string>(j, "precision", path));
    const json& s = field(j, "schedule", path);
    const std::string spath = path + "schedule.";
    m.schedule = NoiseSchedule::from_name(get_as<std::string>(s, "schedule", spath),
                                          get_as<double>(s, "beta_min", spath),
                                          get_as<double>(s, "beta_max", spath));
  } catch (const ParameterError& e) {
    throw LoadError(fmt::format("checkpoint: '{}': {}", path, e.what()));
  }
  m.swap_fixed = get_as<bool>(j, "swap_fixed", path);
  if (m.skip == SkipMode::Learned) {
    const json& nets = field(j, "skip_nets", path);
    m.c1 = mlp_from_json(field(nets, "c1", path + "skip_nets."), path + "skip_nets.c1.");
    m.c2 = mlp_from_json(field(nets, "c2", path + "skip_nets."), path + "skip_nets.c2.");
  }
  try {
    m.validate();
  } catch (const ParameterError& e) {
    throw LoadError(fmt::format("checkpoint: '{}': {}", path, e.what()));
  }
  return m;
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  json doc;
  doc["schema_version"] = kCheckpointSchemaVersion;
  if (const auto* single = std::get_if<ScoreModel>(&ckpt.model)) {
    doc["kind"] = "single";
    doc["model"] = model_to_json(*single);
  } else {
    const auto& pair = std::get<TwoModel>(ckpt.model);
    doc["kind"] = "two_model";
    doc["t_split"] = pair.t_split;
    doc["low"] = model_to_json(pair.low);
    doc["high"] = model_to_json(pair.high);
  }
  if (ckpt.train_seed) doc["train_seed"] = *ckpt.train_seed;
  if (ckpt.state) {
    doc["adam"] = {{"step", ckpt.state->step}, {"first", ckpt.state->first}, {"second", ckpt.state->second}};
  }
  return doc.dump();
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError(fmt::format("checkpoint: parse error: {}", e.what()));
  }
  const auto version = get_as<int>(doc, "schema_version", "");
  if (version != kCheckpointSchemaVersion) {
    throw LoadError(fmt::format("checkpoint: unsupported schema_version {} (expected {})", version,
                                kCheckpointSchemaVersion));
  }
  const auto kind = get_as<std::string>(doc, "kind", "");
  Checkpoint out;
  if (kind == "single") {
    out.model = model_from_json(field(doc, "model", ""), "model.");
  } else if (kind == "two_model") {
    TwoModel pair{model_from_json(field(doc, "low", ""), "low."),
                  model_from_json(field(doc, "high", ""), "high."), get_as<double>(doc, "t_split", "")};
    out.model = std::move(pair);
  } else {
    throw LoadError(fmt::format("checkpoint: field 'kind' has unknown value '{}'", kind));
  }
  if (doc.contains("train_seed")) out.train_seed = get_as<std::uint64_t>(doc, "train_seed", "");
  if (doc.contains("adam")) {
    const json& a = doc.at("adam");
    AdamState state;
    state.step = get_as<std::int64_t>(a, "step", "adam.");
    state.first = get_as<std::vector<std::vector<double>>>(a, "first", "adam.");
    state.second = get_as<std::vector<std::vector<double>>>(a, "second", "adam.");
    if (const auto* single = std::get_if<ScoreModel>(&out.model)) {
      const auto shapes = single->parameters();
      bool ok = shapes.size() == state.first.size() && shapes.size() == state.second.size();
      for (std::size_t b = 0; ok && b < shapes.size(); ++b) {
        ok = shapes[b].size() == state.first[b].size() && shapes[b].size() == state.second[b].size();
      }
      if (!ok) throw LoadError("checkpoint: field 'adam' does not match the model parameter shapes");
    }
    out.state = std::move(state);
  }
  return out;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
  file << checkpoint_to_json(ckpt);
  if (!file) throw Error(fmt::format("failed writing '{}'", path.string()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw LoadError(fmt::format("cannot open checkpoint '{}'", path.string()));
  std::stringstream buffer;
  buffer << file.rdbuf();
  return checkpoint_from_json(buffer.str());
}

}  // namespace collapse
