#include "collapse/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "collapse/error.hpp"

namespace collapse {

using nlohmann::json;

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ExperimentConfig::hash() const { return fmt::format("{:016x}", fnv1a64(canonical)); }

int DatasetConfig::dimension() const {
  if (mixture) return mixture->dim();
  return spec ? dataset_dimension(*spec) : 0;
}

std::optional<MogSpec> DatasetConfig::oracle() const {
  if (mixture) return mixture;
  if (spec) return mog_spec_for(*spec);
  return std::nullopt;
}

std::string DatasetConfig::kind() const {
  if (mixture) return "mog";
  return spec ? dataset_kind_name(*spec) : "none";
}

namespace {

using Errors = std::vector<std::string>;

/// Typed view of one JSON object that records every problem under its key path
/// instead of stopping at the first.
class Reader {
 public:
  Reader(const json* node, std::string path, Errors& errors) : node_(node), path_(std::move(path)), errors_(&errors) {
    if (node_ != nullptr && !node_->is_object()) {
      fail("", "expected an object");
      node_ = nullptr;
    }
  }

  [[nodiscard]] bool has(const std::string& key) {
    seen_.insert(key);
    return node_ != nullptr && node_->contains(key) && !(*node_)[key].is_null();
  }

  [[nodiscard]] std::string key_path(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void fail(const std::string& key, const std::string& message) {
    errors_->push_back(fmt::format("{}: {}", key_path(key), message));
  }

  [[nodiscard]] const json* raw(const std::string& key) {
    if (!has(key)) return nullptr;
    return &(*node_)[key];
  }

  Reader child(const std::string& key) { return {raw(key), key_path(key), *errors_}; }
  [[nodiscard]] bool present() const { return node_ != nullptr; }

  double real(const std::string& key, double fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_number()) {
      fail(key, "expected a number");
      return fallback;
    }
    return v->get<double>();
  }

  long integer(const std::string& key, long fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_integer()) {
      fail(key, "expected an integer");
      return fallback;
    }
    return v->get<long>();
  }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0)) {
      fail(key, "expected a non-negative integer");
      return fallback;
    }
    return v->get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) {
      fail(key, "expected true or false");
      return fallback;
    }
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    if (!v->is_string()) {
      fail(key, "expected a string");
      return fallback;
    }
    return v->get<std::string>();
  }

  std::vector<double> reals(const std::string& key, std::vector<double> fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    std::vector<double> out;
    if (!v->is_array()) {
      fail(key, "expected an array of numbers");
      return fallback;
    }
    for (const auto& e : *v) {
      if (!e.is_number()) {
        fail(key, "expected an array of numbers");
        return fallback;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<int> ints(const std::string& key, std::vector<int> fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    std::vector<int> out;
    if (!v->is_array()) {
      fail(key, "expected an array of integers");
      return fallback;
    }
    for (const auto& e : *v) {
      if (!e.is_number_integer()) {
        fail(key, "expected an array of integers");
        return fallback;
      }
      out.push_back(e.get<int>());
    }
    return out;
  }

  std::pair<double, double> range(const std::string& key, std::pair<double, double> fallback) {
    const json* v = raw(key);
    if (v == nullptr) return fallback;
    const auto values = reals(key, {});
    if (values.size() != 2 || !(values[0] < values[1])) {
      fail(key, "expected [lo, hi] with lo < hi");
      return fallback;
    }
    return {values[0], values[1]};
  }

  /// Runs `fn`, turning a ParameterError into an error under `key`.
  template <class Fn>
  void check(const std::string& key, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      fail(key, e.what());
    }
  }

  /// Reports keys that were never read.
  void finish() {
    if (node_ == nullptr) return;
    for (const auto& [key, value] : node_->items()) {
      if (seen_.count(key) == 0) fail(key, "unknown key");
    }
  }

 private:
  const json* node_;
  std::string path_;
  Errors* errors_;
  std::set<std::string> seen_;
};

DatasetConfig parse_dataset(Reader r) {
  DatasetConfig cfg;
  const long n = r.integer("n", 100000);
  if (n < 1) r.fail("n", "must be >= 1");
  cfg.n = static_cast<std::size_t>(std::max(1L, n));
  const std::string kind = r.string("kind", "mog_nd");
  if (kind == "chessboard") {
    ChessboardSpec s;
    s.cells_per_side = static_cast<int>(r.integer("cells_per_side", s.cells_per_side));
    s.cell_size = r.real("cell_size", s.cell_size);
    cfg.spec = s;
  } else if (kind == "spiral") {
    SpiralSpec s;
    s.max_radius = r.real("max_radius", s.max_radius);
    s.turns = r.real("turns", s.turns);
    s.noise_std = r.real("noise_std", s.noise_std);
    cfg.spec = s;
  } else if (kind == "semicircles") {
    SemicirclesSpec s;
    s.radius = r.real("radius", s.radius);
    s.noise_std = r.real("noise_std", s.noise_std);
    cfg.spec = s;
  } else if (kind == "mog2d") {
    Mog2DSpec s;
    s.components = static_cast<int>(r.integer("components", s.components));
    s.ring_radius = r.real("ring_radius", s.ring_radius);
    s.component_std = r.real("component_std", s.component_std);
    cfg.spec = s;
  } else if (kind == "mog_nd") {
    MogNDSpec s;
    s.dimension = static_cast<int>(r.integer("dimension", s.dimension));
    s.spread = r.real("spread", s.spread);
    s.spread_is_variance = r.boolean("spread_is_variance", s.spread_is_variance);
    cfg.spec = s;
  } else if (kind == "mog1d") {
    Mog1DSpec s;
    s.spread = r.real("spread", s.spread);
    s.spread_is_variance = r.boolean("spread_is_variance", s.spread_is_variance);
    cfg.spec = s;
  } else if (kind == "mog") {
    MogSpec m;
    m.weights = r.reals("weights", {});
    m.variances = r.reals("variances", {});
    const json* means = r.raw("means");
    if (means == nullptr || !means->is_array() || means->empty()) {
      r.fail("means", "expected a nonempty array of rows");
    } else {
      const std::size_t d = (*means)[0].is_array() ? (*means)[0].size() : 0;
      m.means = Matrix::Zero(static_cast<Eigen::Index>(means->size()), static_cast<Eigen::Index>(d));
      bool ok = d > 0;
      for (std::size_t k = 0; ok && k < means->size(); ++k) {
        const auto& row = (*means)[k];
        if (!row.is_array() || row.size() != d) {
          ok = false;
          break;
        }
        for (std::size_t j = 0; j < d; ++j) {
          if (!row[j].is_number()) {
            ok = false;
            break;
          }
          m.means(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = row[j].get<double>();
        }
      }
      if (!ok) r.fail("means", "rows must be equal-length arrays of numbers");
      else r.check("", [&] { m.validate(); });
      cfg.mixture = m;
    }
  } else {
    r.fail("kind", fmt::format("unknown dataset kind '{}' (expected chessboard, spiral, semicircles, mog2d, "
                               "mog_nd, mog1d or mog)", kind));
  }
  if (cfg.spec) r.check("", [&] { validate(*cfg.spec); });
  r.finish();
  return cfg;
}

ModelConfig parse_model(Reader r) {
  ModelConfig cfg;
  ModelArch& a = cfg.arch;
  a.hidden = r.ints("hidden", a.hidden);
  for (int w : a.hidden)
    if (w < 1) r.fail("hidden", "widths must be >= 1");
  r.check("activation", [&] { a.activation = activation_from_name(r.string("activation", "tanh")); });
  r.check("skip", [&] { a.skip = skip_mode_from_name(r.string("skip", "none")); });
  a.swap_fixed = r.boolean("swap_fixed", a.swap_fixed);
  a.skip_hidden = r.ints("skip_hidden", a.skip_hidden);
  for (int w : a.skip_hidden)
    if (w < 1) r.fail("skip_hidden", "widths must be >= 1");
  r.check("precision", [&] { a.precision = precision_from_name(r.string("precision", "float32")); });
  if (r.has("two_model_split")) {
    const double split = r.real("two_model_split", 0.6);
    if (!(split > 0.0 && split < 1.0)) r.fail("two_model_split", "must lie in (0, 1)");
    cfg.two_model_split = split;
  }
  r.finish();
  return cfg;
}

TrainConfig parse_train(Reader r, Seed default_seed) {
  TrainConfig cfg;
  cfg.learning_rate = r.real("lr", cfg.learning_rate);
  cfg.batch_size = static_cast<int>(r.integer("batch", cfg.batch_size));
  cfg.iterations = static_cast<int>(r.integer("iterations", cfg.iterations));
  cfg.t_lo = r.real("t_lo", cfg.t_lo);
  cfg.t_hi = r.real("t_hi", cfg.t_hi);
  if (r.has("high_noise_only") && r.boolean("high_noise_only", false)) {
    cfg.t_lo = 1.0 - kHighNoiseDelta;
    cfg.t_hi = 1.0;
  }
  cfg.seed = Seed{r.u64("seed", default_seed.value)};
  cfg.beta1 = r.real("beta1", cfg.beta1);
  cfg.beta2 = r.real("beta2", cfg.beta2);
  cfg.adam_eps = r.real("adam_eps", cfg.adam_eps);
  r.check("", [&] { cfg.validate(std::numeric_limits<Eigen::Index>::max()); });
  r.finish();
  return cfg;
}

SamplerEntry parse_sampler(Reader r, double t_min) {
  SamplerEntry e;
  SamplerKind kind = SamplerKind::ODE;
  r.check("sampler", [&] { kind = sampler_from_name(r.string("sampler", "ode")); });
  e.config = SamplerConfig::defaults(kind);
  e.config.t_end = t_min;
  e.name = r.string("name", sampler_name(kind));
  e.config.steps = static_cast<int>(r.integer("steps", e.config.steps));
  e.config.t_end = r.real("t_end", e.config.t_end);
  e.config.t_start = r.real("t_start", e.config.t_start);
  e.config.snr = r.real("snr", e.config.snr);
  e.config.corrector_steps = static_cast<int>(r.integer("corrector_steps", e.config.corrector_steps));
  e.config.ald_levels = static_cast<int>(r.integer("levels", e.config.ald_levels));
  e.config.ald_steps_per_level = static_cast<int>(r.integer("steps_per_level", e.config.ald_steps_per_level));
  e.config.ald_base_step = r.real("base_step", e.config.ald_base_step);
  e.count = r.integer("n", e.count);
  if (e.count < 1) r.fail("n", "must be >= 1");
  e.record_stride = static_cast<int>(r.integer("record_stride", 0));
  if (e.record_stride < 0) r.fail("record_stride", "must be >= 0");
  r.check("", [&] { e.config.validate(); });
  r.finish();
  return e;
}

TidConfig parse_tid(Reader r, Seed default_seed) {
  TidConfig cfg;
  cfg.options.seed = default_seed;
  if (!r.present()) return cfg;
  cfg.enabled = r.boolean("enabled", true);
  cfg.epsilons = r.reals("epsilons", cfg.epsilons);
  if (cfg.epsilons.empty()) r.fail("epsilons", "must not be empty");
  for (double e : cfg.epsilons)
    if (!(e > 0.0)) r.fail("epsilons", "values must be > 0");
  cfg.options.subset = r.integer("subset", cfg.options.subset);
  if (cfg.options.subset < 1) r.fail("subset", "must be >= 1");
  if (r.has("dim")) {
    const long dim = r.integer("dim", 0);
    if (dim < 0) r.fail("dim", "must be >= 0");
    cfg.options.dim = static_cast<int>(dim);
  }
  r.check("tid_convention",
          [&] { cfg.options.convention = tid_convention_from_name(r.string("tid_convention", "reciprocal")); });
  if (r.has("top_k")) {
    const long k = r.integer("top_k", 1);
    if (k < 1) r.fail("top_k", "must be >= 1");
    cfg.options.top_k = k;
  }
  cfg.options.seed = Seed{r.u64("seed", default_seed.value)};
  r.finish();
  return cfg;
}

DiagnosticsConfig parse_diagnostics(Reader r) {
  DiagnosticsConfig cfg;
  if (!r.present()) return cfg;
  {
    Reader m = r.child("mae");
    if (m.present()) {
      cfg.mae.enabled = m.boolean("enabled", true);
      cfg.mae.times = m.reals("times", cfg.mae.times);
      for (double t : cfg.mae.times)
        if (!(t > 0.0 && t <= 1.0)) m.fail("times", "values must lie in (0, 1]");
      cfg.mae.points = m.integer("points", cfg.mae.points);
      if (cfg.mae.points < 1) m.fail("points", "must be >= 1");
      m.finish();
    }
  }
  {
    Reader m = r.child("error_covariance");
    if (m.present()) {
      cfg.error_covariance.enabled = m.boolean("enabled", true);
      if (m.has("samplers")) {
        cfg.error_covariance.samplers.clear();
        const json* list = m.raw("samplers");
        if (!list->is_array()) m.fail("samplers", "expected an array of names");
        else
          for (const auto& s : *list) {
            m.check("samplers", [&] {
              const SamplerKind k = sampler_from_name(s.is_string() ? s.get<std::string>() : std::string("?"));
              if (k != SamplerKind::ODE && k != SamplerKind::SDE) throw ParameterError("only ode and sde are supported");
              cfg.error_covariance.samplers.push_back(k);
            });
          }
      }
      cfg.error_covariance.steps = static_cast<int>(m.integer("steps", cfg.error_covariance.steps));
      if (cfg.error_covariance.steps < 1) m.fail("steps", "must be >= 1");
      cfg.error_covariance.chains = m.integer("chains", cfg.error_covariance.chains);
      if (cfg.error_covariance.chains < 1) m.fail("chains", "must be >= 1");
      m.finish();
    }
  }
  {
    Reader m = r.child("density");
    if (m.present()) {
      auto& d = cfg.density;
      d.enabled = m.boolean("enabled", true);
      m.check("sampler", [&] { d.sampler = sampler_from_name(m.string("sampler", "ode")); });
      if (d.sampler == SamplerKind::ALD) m.fail("sampler", "ald has no time grid to record");
      d.steps = static_cast<int>(m.integer("steps", d.steps));
      d.chains = m.integer("chains", d.chains);
      d.record_stride = static_cast<int>(m.integer("record_stride", d.record_stride));
      d.dim = static_cast<int>(m.integer("dim", d.dim));
      d.bins = static_cast<int>(m.integer("bins", d.bins));
      d.range = m.range("range", d.range);
      if (d.steps < 1) m.fail("steps", "must be >= 1");
      if (d.chains < 1) m.fail("chains", "must be >= 1");
      if (d.record_stride < 1) m.fail("record_stride", "must be >= 1");
      if (d.dim < 0) m.fail("dim", "must be >= 0");
      if (d.bins < 1) m.fail("bins", "must be >= 1");
      m.finish();
    }
  }
  {
    Reader m = r.child("velocity_grid");
    if (m.present()) {
      auto& g = cfg.velocity_grid;
      g.enabled = m.boolean("enabled", true);
      g.dim = static_cast<int>(m.integer("dim", g.dim));
      g.x_range = m.range("x_range", g.x_range);
      g.t_range = m.range("t_range", g.t_range);
      const auto res = m.ints("resolution", {g.x_resolution, g.t_resolution});
      if (res.size() != 2 || res[0] < 2 || res[1] < 2) m.fail("resolution", "expected [nx, nt], both >= 2");
      else {
        g.x_resolution = res[0];
        g.t_resolution = res[1];
      }
      if (g.dim < 0) m.fail("dim", "must be >= 0");
      m.finish();
    }
  }
  r.finish();
  return cfg;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const ConfigOverrides& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (overrides.seed) doc["seed"] = *overrides.seed;
  if (overrides.output_dir) doc["output_dir"] = overrides.output_dir->string();
  if (overrides.threads) doc["threads"] = *overrides.threads;

  Errors errors;
  Reader root(&doc, "", errors);
  ExperimentConfig cfg;
  cfg.seed = Seed{root.u64("seed", 0)};
  cfg.output_dir = root.string("output_dir", "out");
  cfg.threads = static_cast<int>(root.integer("threads", 1));
  if (cfg.threads < 1) root.fail("threads", "must be >= 1");
  cfg.t_min = root.real("t_min", kDefaultTimeFloor);
  if (!(cfg.t_min > 0.0 && cfg.t_min < 1.0)) root.fail("t_min", "must lie in (0, 1)");
  cfg.plots = root.boolean("plots", true);

  {
    Reader d = root.child("diffusion");
    const std::string name = d.string("schedule", "vp");
    const double bmin = d.real("beta_min", 0.1);
    const double bmax = d.real("beta_max", 20.0);
    d.check("schedule", [&] { cfg.schedule = NoiseSchedule::from_name(name, bmin, bmax); });
    d.finish();
  }

  if (root.has("dataset")) cfg.dataset = parse_dataset(root.child("dataset"));

  const Seed train_seed = cfg.seed.child(1);
  const json base_model = root.has("model") ? *root.raw("model") : json::object();
  const json base_train = root.has("train") ? *root.raw("train") : json::object();
  auto make_variant = [&](const std::string& name, const json& model, const json& train, const std::string& path) {
    VariantConfig v;
    v.name = name;
    v.model = parse_model(Reader(&model, path + "model", errors));
    v.train = parse_train(Reader(&train, path + "train", errors), train_seed);
    return v;
  };
  if (root.has("variants")) {
    const json& list = *root.raw("variants");
    if (!list.is_array() || list.empty()) {
      root.fail("variants", "expected a nonempty array");
    } else {
      std::set<std::string> names;
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = fmt::format("variants[{}]", i);
        Reader vr(&list[i], path, errors);
        const std::string name = vr.string("name", fmt::format("v{}", i));
        if (!names.insert(name).second) vr.fail("name", fmt::format("duplicate variant name '{}'", name));
        json model = base_model;
        json train = base_train;
        if (const json* m = vr.raw("model")) model.merge_patch(*m);
        if (const json* t = vr.raw("train")) train.merge_patch(*t);
        vr.finish();
        if (model.is_object() && train.is_object()) cfg.variants.push_back(make_variant(name, model, train, path + "."));
      }
    }
  } else if (root.has("model") || root.has("train")) {
    cfg.variants.push_back(make_variant("base", base_model, base_train, ""));
  }

  if (root.has("samplers")) {
    const json& list = *root.raw("samplers");
    if (!list.is_array()) {
      root.fail("samplers", "expected an array");
    } else {
      std::set<std::string> names;
      for (std::size_t i = 0; i < list.size(); ++i) {
        auto entry = parse_sampler(Reader(&list[i], fmt::format("samplers[{}]", i), errors), cfg.t_min);
        if (!names.insert(entry.name).second) {
          errors.push_back(fmt::format("samplers[{}].name: duplicate sampler name '{}'", i, entry.name));
        }
        cfg.samplers.push_back(std::move(entry));
      }
    }
  }

  cfg.tid = parse_tid(root.child("tid"), cfg.seed.child(5));
  cfg.diagnostics = parse_diagnostics(root.child("diagnostics"));
  {
    Reader s = root.child("seesaw");
    if (s.present()) {
      cfg.seesaw.enabled = s.boolean("enabled", true);
      cfg.seesaw.p_max = static_cast<int>(s.integer("p_max", cfg.seesaw.p_max));
      if (cfg.seesaw.p_max < 1 || cfg.seesaw.p_max > 40) s.fail("p_max", "must lie in [1, 40]");
      s.finish();
    }
  }
  root.finish();

  if (cfg.dataset) {
    const int d = cfg.dataset->dimension();
    if (cfg.tid.options.dim && d > 0 && *cfg.tid.options.dim >= d) errors.push_back("tid.dim: exceeds data dimension");
    const auto& diag = cfg.diagnostics;
    if (diag.density.enabled && d > 0 && diag.density.dim >= d) errors.push_back("diagnostics.density.dim: exceeds data dimension");
    if (diag.velocity_grid.enabled && d > 0 && diag.velocity_grid.dim >= d)
      errors.push_back("diagnostics.velocity_grid.dim: exceeds data dimension");
    const bool needs_oracle = diag.mae.enabled || diag.error_covariance.enabled;
    if (needs_oracle && !cfg.dataset->oracle()) {
      errors.push_back("diagnostics: mae and error_covariance need a Gaussian-mixture dataset");
    }
    for (const auto& v : cfg.variants) {
      if (static_cast<std::size_t>(v.train.batch_size) > cfg.dataset->n) {
        errors.push_back(fmt::format("train.batch: {} exceeds dataset.n = {} (variant '{}')", v.train.batch_size,
                                     cfg.dataset->n, v.name));
      }
    }
  } else if (!cfg.variants.empty() || !cfg.samplers.empty()) {
    errors.push_back("dataset: required when model, train or samplers are given");
  }

  if (!errors.empty()) {
    std::string message = fmt::format("invalid config ({} problem{}):", errors.size(), errors.size() == 1 ? "" : "s");
    for (const auto& e : errors) message += "\n  " + e;
    throw ConfigError(message);
  }
  cfg.canonical = doc.dump();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), overrides);
}

}  // namespace collapse
