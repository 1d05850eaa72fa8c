// collapse-lab: command-line front end for the collapse library.

#include <malloc.h>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "collapse/collapse.hpp"

namespace {

using namespace collapse;

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
};

ExperimentConfig require_config(const Globals& g) {
  if (g.config.empty()) throw ConfigError("--config is required for this subcommand");
  ConfigOverrides ov;
  ov.seed = g.seed;
  if (!g.out.empty()) ov.output_dir = g.out;
  ov.threads = g.threads;
  return load_config(g.config, ov);
}

void run_stages(const Globals& g, Stages stages) {
  const ExperimentConfig cfg = require_config(g);
  Eigen::setNbThreads(cfg.threads);
  const auto dir = run_experiment(cfg, stages, &std::cerr);
  std::cerr << fmt::format("artifacts in {}\n", dir.string());
}

struct TidArgs {
  std::string train;
  std::string sampled;
  std::vector<double> eps{0.02};
  long subset = 2000;
  std::optional<int> dim;
  std::string convention = "reciprocal";
  std::optional<long> top_k;
  std::uint64_t subset_seed = 0;
  std::string output;
};

void run_tid(const Globals& g, const TidArgs& a) {
  if (a.train.empty() && a.sampled.empty()) {
    Stages s = Stages::none();
    s.tid = true;
    run_stages(g, s);
    return;
  }
  if (a.train.empty() || a.sampled.empty()) throw ConfigError("tid: give both --train and --sampled");
  TidOptions opt;
  opt.subset = a.subset;
  opt.dim = a.dim;
  opt.convention = tid_convention_from_name(a.convention);
  opt.top_k = a.top_k;
  opt.seed = Seed{g.seed.value_or(a.subset_seed)};
  const Dataset train = read_dataset_csv(a.train);
  const Dataset sampled = read_dataset_csv(a.sampled);
  const TidReport report = tid_report(train.points, sampled.points, a.eps, opt);
  if (a.output.empty()) {
    CsvTable table({"epsilon", "hill_train", "hill_sampled", "alpha_train", "alpha_sampled", "tid"});
    for (std::size_t k = 0; k < report.epsilons.size(); ++k) {
      table.add_row(std::vector<double>{report.epsilons[k], report.hill_train[k], report.hill_sampled[k],
                                        report.tail_index_train[k], report.tail_index_sampled[k], report.tid[k]});
    }
    std::cout << table.str();
  } else {
    report.write_csv(a.output);
  }
}

void run_seesaw(const Globals& g, int p_max_flag) {
  int p_max = p_max_flag;
  std::filesystem::path out = g.out.empty() ? std::filesystem::path(".") : std::filesystem::path(g.out);
  if (!g.config.empty()) {
    const ExperimentConfig cfg = require_config(g);
    if (cfg.seesaw.enabled && p_max_flag <= 0) p_max = cfg.seesaw.p_max;
    out = cfg.output_dir;
  }
  if (p_max <= 0) p_max = 20;
  if (p_max > seesaw::kMaxDegree) throw ConfigError(fmt::format("--p-max must be <= {}", seesaw::kMaxDegree));
  std::filesystem::create_directories(out);
  write_seesaw_csv(p_max, out / "seesaw.csv");
  std::cerr << fmt::format("wrote {}\n", (out / "seesaw.csv").string());
}

}  // namespace

int main(int argc, char** argv) {
  // Training allocates the same multi-megabyte blocks every step; keep them on
  // the heap instead of mapping and zeroing fresh pages each time.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);

  CLI::App app{"Diffusion collapse-error lab: train, sample, and measure collapse (TID) on synthetic data"};
  app.set_version_flag("--version", collapse::library_version());
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "experiment config (JSON)");
  app.add_option("--seed", g.seed, "override the global seed");
  app.add_option("--out", g.out, "override the output directory");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("gen", "generate the training dataset");
  auto* train = app.add_subcommand("train", "train every model variant");
  auto* sample = app.add_subcommand("sample", "sample from trained variants");
  auto* diagnose = app.add_subcommand("diagnose", "velocity MAE, error covariance, density, velocity grid");
  auto* run = app.add_subcommand("run", "run every enabled stage");

  TidArgs tid_args;
  auto* tid = app.add_subcommand("tid", "tail index difference (from the run directory, or two CSVs)");
  tid->add_option("--train", tid_args.train, "training dataset CSV");
  tid->add_option("--sampled", tid_args.sampled, "sampled dataset CSV");
  tid->add_option("--eps", tid_args.eps, "neighbourhood radii")->delimiter(',');
  tid->add_option("--subset", tid_args.subset, "rows drawn from each dataset")->check(CLI::PositiveNumber);
  tid->add_option("--dim", tid_args.dim, "measure distances along one coordinate");
  tid->add_option("--convention", tid_args.convention, "reciprocal or raw")
      ->check(CLI::IsMember({"reciprocal", "raw"}));
  tid->add_option("--top-k", tid_args.top_k, "use only the k largest counts")->check(CLI::PositiveNumber);
  tid->add_option("--subset-seed", tid_args.subset_seed, "seed for the subset draw");
  tid->add_option("--output", tid_args.output, "write CSV here instead of stdout");

  int p_max = 0;
  auto* see = app.add_subcommand("seesaw", "closed-form see-saw losses");
  see->add_option("--p-max", p_max, "largest expansion order")->check(CLI::Range(1, 40));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (gen->parsed()) {
      Stages s = Stages::none();
      s.gen = true;
      run_stages(g, s);
    } else if (train->parsed()) {
      Stages s = Stages::none();
      s.train = true;
      run_stages(g, s);
    } else if (sample->parsed()) {
      Stages s = Stages::none();
      s.sample = true;
      run_stages(g, s);
    } else if (diagnose->parsed()) {
      Stages s = Stages::none();
      s.diagnose = true;
      run_stages(g, s);
    } else if (run->parsed()) {
      run_stages(g, Stages::all());
    } else if (tid->parsed()) {
      run_tid(g, tid_args);
    } else if (see->parsed()) {
      run_seesaw(g, p_max);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
