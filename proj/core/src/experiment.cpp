#include "collapse/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <map>
#include <optional>
#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "collapse/csv.hpp"
#include "collapse/diagnostics.hpp"
#include "collapse/error.hpp"
#include "collapse/seesaw.hpp"
#include "collapse/svg.hpp"

#ifndef COLLAPSE_VERSION
#define COLLAPSE_VERSION "0.0.0"
#endif

namespace collapse {

namespace fs = std::filesystem;
using nlohmann::json;

StageError::StageError(std::string stage, const std::string& message)
    : Error(fmt::format("stage '{}' failed: {}", stage, message)), stage_(std::move(stage)) {}

std::string library_version() { return COLLAPSE_VERSION; }

Dataset training_data(const ExperimentConfig& cfg) {
  if (!cfg.dataset) throw ConfigError("config has no dataset");
  const auto& d = *cfg.dataset;
  const Seed seed = cfg.seed.child(0);
  if (d.mixture) {
    Dataset out;
    out.points = mog_sample(*d.mixture, static_cast<Eigen::Index>(d.n), seed);
    out.seed = seed.value;
    return out;
  }
  return gen_dataset(*d.spec, d.n, seed);
}

TrainedVariant train_variant(const ExperimentConfig& cfg, const VariantConfig& variant, const Dataset& data,
                             std::ostream* log) {
  const Seed model_seed = cfg.seed.child(2);
  const int d = static_cast<int>(data.dim());
  TrainObserver observer;
  if (log != nullptr) {
    const int every = std::max(1, variant.train.iterations / 10);
    observer = [log, every, &variant](int it, double loss) {
      if ((it + 1) % every == 0) *log << fmt::format("  [{}] iter {:>6}  loss {:.5f}\n", variant.name, it + 1, loss);
    };
  }
  TrainedVariant out;
  out.name = variant.name;
  if (variant.model.two_model_split) {
    ScoreModel high = ScoreModel::create(variant.model.arch, d, cfg.schedule, model_seed);
    ScoreModel low = ScoreModel::create(variant.model.arch, d, cfg.schedule, model_seed.child(1));
    auto result = train_two_model(std::move(low), std::move(high), data, variant.train,
                                  *variant.model.two_model_split, observer);
    out.loss_history = result.low.loss_history;
    out.loss_history.insert(out.loss_history.end(), result.high.loss_history.begin(),
                            result.high.loss_history.end());
    out.checkpoint = Checkpoint{std::move(result.model), std::nullopt, variant.train.seed.value};
  } else {
    ScoreModel model = ScoreModel::create(variant.model.arch, d, cfg.schedule, model_seed);
    auto result = train(std::move(model), data, variant.train, observer);
    out.loss_history = std::move(result.loss_history);
    out.checkpoint = Checkpoint{std::move(result.model), std::move(result.state), variant.train.seed.value};
  }
  return out;
}

ScoreSource source_from_checkpoint(const Checkpoint& ckpt, double t_min) {
  ScoreSource src = std::holds_alternative<ScoreModel>(ckpt.model)
                        ? ScoreSource::model(std::get<ScoreModel>(ckpt.model))
                        : ScoreSource::two_model(std::get<TwoModel>(ckpt.model));
  src.set_t_min(t_min);
  return src;
}

void write_seesaw_csv(int p_max, const fs::path& path) {
  CsvTable table({"p", "ell1", "ell2"});
  for (int p = 1; p <= p_max; ++p) {
    const auto losses = seesaw::seesaw_losses(p);
    table.add_row(std::vector<double>{static_cast<double>(p), losses.low_noise, losses.high_noise});
  }
  table.write(path);
}

namespace {

class DirectoryLock {
 public:
  explicit DirectoryLock(fs::path path) : path_(std::move(path)) {
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (f == nullptr) {
      throw Error(fmt::format("output directory is in use (remove '{}' if no run is active)", path_.string()));
    }
    std::fclose(f);
  }
  ~DirectoryLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  fs::path path_;
};

template <class Fn>
auto stage(const std::string& name, std::ostream* log, Fn&& fn) {
  if (log != nullptr) *log << fmt::format("== {}\n", name);
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Plotter {
  bool enabled;
  fs::path dir;

  void emit(const std::string& name, const std::string& doc) const {
    if (!enabled) return;
    fs::create_directories(dir);
    svg::write(doc, (dir / (name + ".svg")).string());
  }
};

int first_width(const VariantConfig& v) { return v.model.arch.hidden.empty() ? 0 : v.model.arch.hidden.front(); }

}  // namespace

fs::path run_experiment(const ExperimentConfig& cfg, const Stages& stages, std::ostream* log) {
  const auto started = std::chrono::steady_clock::now();
  const std::string started_at = utc_now();
  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  DirectoryLock lock(out / ".lock");
  const Plotter plots{cfg.plots, out / "plots"};
  json artifacts = json::array();
  auto note = [&](const fs::path& p) { artifacts.push_back(fs::relative(p, out).generic_string()); };

  const bool needs_models = cfg.dataset && !cfg.variants.empty() &&
                            (stages.train || stages.sample || stages.tid || stages.diagnose);
  const bool needs_data = cfg.dataset && (stages.gen || needs_models);

  std::optional<Dataset> data;
  if (needs_data) {
    data = stage("gen", log, [&] {
      const fs::path path = out / "data" / "train.csv";
      if (!stages.gen && fs::exists(path)) return read_dataset_csv(path);
      Dataset d = training_data(cfg);
      fs::create_directories(path.parent_path());
      write_dataset_csv(d.points, path);
      note(path);
      if (d.dim() >= 2) {
        plots.emit("train_data", svg::scatter_plot({"training data", "dim0", "dim1", false},
                                                   take_rows(d.points, choose_rows(d.size(), 5000, Seed{0}))));
      }
      return d;
    });
  }

  std::map<std::string, Checkpoint> models;
  if (needs_models) {
    stage("train", log, [&] {
      fs::create_directories(out / "models");
      std::vector<svg::Series> curves;
      for (const auto& v : cfg.variants) {
        const fs::path ckpt_path = out / "models" / (v.name + ".json");
        if (!stages.train) {
          if (!fs::exists(ckpt_path)) {
            throw Error(fmt::format("no checkpoint for variant '{}' at '{}'; run the train stage first", v.name,
                                    ckpt_path.string()));
          }
          models.emplace(v.name, load_checkpoint(ckpt_path));
          continue;
        }
        if (log != nullptr) *log << fmt::format("training '{}'\n", v.name);
        TrainedVariant trained = train_variant(cfg, v, *data, log);
        save_checkpoint(trained.checkpoint, ckpt_path);
        note(ckpt_path);
        const fs::path loss_path = out / "models" / (v.name + "_loss.csv");
        CsvTable loss({"iter", "loss"});
        svg::Series series{v.name, {}, {}};
        for (std::size_t i = 0; i < trained.loss_history.size(); ++i) {
          loss.add_row(std::vector<double>{static_cast<double>(i), trained.loss_history[i]});
          series.xs.push_back(static_cast<double>(i));
          series.ys.push_back(trained.loss_history[i]);
        }
        loss.write(loss_path);
        note(loss_path);
        curves.push_back(std::move(series));
        models.emplace(v.name, std::move(trained.checkpoint));
      }
      if (!curves.empty()) plots.emit("loss", svg::line_plot({"training loss", "iteration", "loss", true}, curves));
      return 0;
    });
  }

  // samples[variant][sampler]
  std::map<std::string, std::map<std::string, Matrix>> samples;
  if (needs_models && !cfg.samplers.empty() && (stages.sample || stages.tid)) {
    stage("sample", log, [&] {
      fs::create_directories(out / "samples");
      for (const auto& v : cfg.variants) {
        const ScoreSource src = source_from_checkpoint(models.at(v.name), cfg.t_min);
        for (std::size_t i = 0; i < cfg.samplers.size(); ++i) {
          const auto& s = cfg.samplers[i];
          const fs::path path = out / "samples" / fmt::format("{}_{}.csv", v.name, s.name);
          if (!stages.sample) {
            if (!fs::exists(path)) throw Error(fmt::format("missing samples '{}'", path.string()));
            samples[v.name][s.name] = read_dataset_csv(path).points;
            continue;
          }
          if (log != nullptr) *log << fmt::format("sampling '{}' with {}\n", v.name, s.name);
          auto result = run_sampler(src, s.config, s.count, cfg.seed.child(3).child(i), s.record_stride);
          write_dataset_csv(result.samples.points, path);
          note(path);
          if (result.trajectory) {
            fs::create_directories(out / "trajectories");
            const fs::path tpath = out / "trajectories" / fmt::format("{}_{}.csv", v.name, s.name);
            write_trajectory_csv(*result.trajectory, tpath.string());
            note(tpath);
          }
          if (result.samples.dim() >= 2) {
            plots.emit(fmt::format("samples_{}_{}", v.name, s.name),
                       svg::scatter_plot({fmt::format("{} / {}", v.name, s.name), "dim0", "dim1", false},
                                         take_rows(result.samples.points,
                                                   choose_rows(result.samples.size(), 5000, Seed{0}))));
          }
          samples[v.name][s.name] = std::move(result.samples.points);
        }
      }
      return 0;
    });
  }

  if (stages.tid && cfg.tid.enabled && !samples.empty()) {
    stage("tid", log, [&] {
      CsvTable table({"variant", "sampler", "epsilon", "hill_train", "hill_sampled", "alpha_train", "alpha_sampled",
                      "tid"});
      std::map<std::string, svg::Series> by_sampler;
      for (const auto& v : cfg.variants) {
        for (const auto& s : cfg.samplers) {
          const TidReport report = tid_report(data->points, samples.at(v.name).at(s.name), cfg.tid.epsilons,
                                              cfg.tid.options);
          for (std::size_t k = 0; k < report.epsilons.size(); ++k) {
            table.add_row({v.name, s.name, format_real(report.epsilons[k]), format_real(report.hill_train[k]),
                           format_real(report.hill_sampled[k]), format_real(report.tail_index_train[k]),
                           format_real(report.tail_index_sampled[k]), format_real(report.tid[k])});
          }
          auto& series = by_sampler[s.name];
          series.label = s.name;
          series.xs.push_back(static_cast<double>(first_width(v)));
          series.ys.push_back(report.tid.front());
        }
      }
      table.write(out / "tid.csv");
      note(out / "tid.csv");
      if (cfg.variants.size() > 1) {
        std::vector<svg::Series> series;
        for (auto& [name, s] : by_sampler) series.push_back(s);
        plots.emit("tid", svg::line_plot({fmt::format("TID at eps = {}", cfg.tid.epsilons.front()), "width",
                                          "TID", false},
                                         series));
      }
      return 0;
    });
  }

  const auto& diag = cfg.diagnostics;
  const bool any_diag = diag.mae.enabled || diag.error_covariance.enabled || diag.density.enabled ||
                        diag.velocity_grid.enabled;
  if (stages.diagnose && any_diag && needs_models) {
    stage("diagnose", log, [&] {
      const auto mixture = cfg.dataset->oracle();
      std::optional<ScoreSource> oracle;
      if (mixture) oracle = ScoreSource::oracle(*mixture, cfg.schedule);
      const Seed seed = cfg.seed.child(4);

      if (diag.mae.enabled) {
        CsvTable table({"variant", "width", "t", "mae"});
        std::vector<svg::Series> series;
        for (double t : diag.mae.times) series.push_back({fmt::format("t = {}", t), {}, {}});
        for (const auto& v : cfg.variants) {
          const ScoreSource src = source_from_checkpoint(models.at(v.name), cfg.t_min);
          for (std::size_t k = 0; k < diag.mae.times.size(); ++k) {
            const double t = diag.mae.times[k];
            const double mae = velocity_mae(src, *oracle, t, diag.mae.points, seed.child(0).child(k));
            table.add_row({v.name, std::to_string(first_width(v)), format_real(t), format_real(mae)});
            series[k].xs.push_back(first_width(v));
            series[k].ys.push_back(mae);
          }
        }
        table.write(out / "mae.csv");
        note(out / "mae.csv");
        plots.emit("mae", svg::line_plot({"velocity MAE", "width", "MAE", true}, series));
      }

      if (diag.error_covariance.enabled) {
        CsvTable table({"variant", "sampler", "t", "c"});
        std::vector<svg::Series> series;
        for (const auto& v : cfg.variants) {
          const ScoreSource src = source_from_checkpoint(models.at(v.name), cfg.t_min);
          for (SamplerKind kind : diag.error_covariance.samplers) {
            const auto cov = error_covariance(src, *oracle, diag.error_covariance.steps, diag.error_covariance.chains,
                                              kind, seed.child(1), cfg.t_min);
            svg::Series s{fmt::format("{} / {}", v.name, sampler_name(kind)), {}, {}};
            for (const auto& p : cov) {
              table.add_row({v.name, sampler_name(kind), format_real(p.t), format_real(p.c)});
              s.xs.push_back(p.t);
              s.ys.push_back(p.c);
            }
            series.push_back(std::move(s));
          }
        }
        table.write(out / "errcov.csv");
        note(out / "errcov.csv");
        plots.emit("errcov", svg::line_plot({"velocity error covariance", "t", "c(t)", false}, series));
      }

      if (diag.density.enabled) {
        CsvTable table({"variant", "t", "bin_center", "density"});
        for (const auto& v : cfg.variants) {
          const ScoreSource src = source_from_checkpoint(models.at(v.name), cfg.t_min);
          SamplerConfig sc = SamplerConfig::defaults(diag.density.sampler);
          sc.steps = diag.density.steps;
          sc.t_end = cfg.t_min;
          const auto result = run_sampler(src, sc, diag.density.chains, seed.child(2), diag.density.record_stride);
          const auto hist = density_evolution(*result.trajectory, diag.density.dim, diag.density.bins,
                                              diag.density.range);
          for (std::size_t k = 0; k < hist.times.size(); ++k)
            for (std::size_t b = 0; b < hist.bin_centers.size(); ++b)
              table.add_row({v.name, format_real(hist.times[k]), format_real(hist.bin_centers[b]),
                             format_real(hist.density(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(b)))});
          plots.emit(fmt::format("density_{}", v.name),
                     svg::heatmap({fmt::format("density of dim {} ({})", diag.density.dim, v.name), "x", "t", false},
                                  hist.bin_centers, hist.times, hist.density));
        }
        table.write(out / "density.csv");
        note(out / "density.csv");
      }

      if (diag.velocity_grid.enabled) {
        const auto& g = diag.velocity_grid;
        CsvTable table({"variant", "x", "t", "v"});
        auto add = [&](const std::string& name, const ScoreSource& src) {
          const auto grid = velocity_grid(src, g.dim, g.x_range, g.t_range, g.x_resolution, g.t_resolution,
                                          seed.child(3));
          for (std::size_t i = 0; i < grid.ts.size(); ++i)
            for (std::size_t j = 0; j < grid.xs.size(); ++j)
              table.add_row({name, format_real(grid.xs[j]), format_real(grid.ts[i]),
                             format_real(grid.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))});
          plots.emit(fmt::format("velocity_{}", name),
                     svg::heatmap({fmt::format("velocity dim {} ({})", g.dim, name), "x", "t", false}, grid.xs,
                                  grid.ts, grid.values));
        };
        if (oracle) {
          ScoreSource o = *oracle;
          o.set_t_min(0.0);
          add("oracle", o);
        }
        for (const auto& v : cfg.variants) add(v.name, source_from_checkpoint(models.at(v.name), cfg.t_min));
        table.write(out / "velocity_grid.csv");
        note(out / "velocity_grid.csv");
      }
      return 0;
    });
  }

  if (stages.seesaw && cfg.seesaw.enabled) {
    stage("seesaw", log, [&] {
      write_seesaw_csv(cfg.seesaw.p_max, out / "seesaw.csv");
      note(out / "seesaw.csv");
      svg::Series l1{"ell1 (low noise)", {}, {}};
      svg::Series l2{"ell2 (high noise)", {}, {}};
      for (int p = 1; p <= cfg.seesaw.p_max; ++p) {
        const auto losses = seesaw::seesaw_losses(p);
        l1.xs.push_back(p);
        l1.ys.push_back(losses.low_noise);
        l2.xs.push_back(p);
        l2.ys.push_back(losses.high_noise);
      }
      plots.emit("seesaw", svg::line_plot({"see-saw losses", "p", "loss", true}, {l1, l2}));
      return 0;
    });
  }

  stage("manifest", log, [&] {
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    json manifest;
    manifest["config_hash"] = cfg.hash();
    manifest["config"] = json::parse(cfg.canonical);
    manifest["seed"] = cfg.seed.value;
    manifest["version"] = library_version();
    manifest["eigen"] = fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION);
    manifest["stages"] = {{"gen", stages.gen},     {"train", stages.train},       {"sample", stages.sample},
                          {"tid", stages.tid},     {"diagnose", stages.diagnose}, {"seesaw", stages.seesaw}};
    manifest["artifacts"] = artifacts;
    manifest["started_at"] = started_at;
    manifest["wall_clock_seconds"] = seconds;
    std::FILE* f = std::fopen((out / "manifest.json").c_str(), "w");
    if (f == nullptr) throw Error("cannot write manifest.json");
    const std::string text = manifest.dump(2) + "\n";
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
    return 0;
  });
  return out;
}

}  // namespace collapse
