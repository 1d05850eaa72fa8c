#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "collapse/config.hpp"
#include "collapse/error.hpp"
#include "collapse/experiment.hpp"

using namespace collapse;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(testing::TempDir()) / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Config, Defaults) {
  const auto cfg = parse_config(R"({"dataset": {"kind": "mog_nd"}, "model": {}, "train": {"batch": 100}})");
  ASSERT_EQ(cfg.variants.size(), 1u);
  EXPECT_EQ(cfg.variants[0].name, "base");
  EXPECT_EQ(cfg.variants[0].model.arch.activation, Activation::Tanh);
  EXPECT_DOUBLE_EQ(cfg.variants[0].train.learning_rate, 5e-3);
  EXPECT_EQ(cfg.dataset->dimension(), 10);
  EXPECT_DOUBLE_EQ(cfg.t_min, 1e-3);
  EXPECT_EQ(cfg.schedule, NoiseSchedule::vp());
  EXPECT_EQ(cfg.tid.options.subset, 2000);
}

TEST(Config, ListsEveryOffendingKey) {
  const std::string msg = config_error(R"({
    "dataset": {"kind": "mog_nd", "n": -5, "colour": 1},
    "model": {"hidden": [0]},
    "train": {"lr": "fast"},
    "samplers": [{"sampler": "euler"}],
    "bogus": true
  })");
  for (const char* key : {"dataset.n", "dataset.colour", "model.hidden", "train.lr", "samplers[0].sampler", "bogus"}) {
    EXPECT_NE(msg.find(key), std::string::npos) << key << " missing from:\n" << msg;
  }
}

TEST(Config, UnknownSamplerNamesKeyAndWritesNothing) {
  const fs::path dir = fresh_dir("bad_sampler");
  const std::string text = R"({"output_dir": ")" + dir.string() +
                           R"(", "dataset": {"kind": "mog1d", "n": 100}, "samplers": [{"sampler": "leapfrog"}]})";
  const std::string msg = config_error(text);
  EXPECT_NE(msg.find("samplers[0].sampler"), std::string::npos) << msg;
  EXPECT_NE(msg.find("leapfrog"), std::string::npos) << msg;
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Config, VariantsMergeOverBase) {
  const auto cfg = parse_config(R"({
    "dataset": {"kind": "mog_nd", "n": 5000},
    "model": {"hidden": [8, 8], "activation": "relu"},
    "train": {"iterations": 7, "batch": 10},
    "variants": [{"name": "a"}, {"name": "b", "model": {"hidden": [4]}, "train": {"high_noise_only": true}}]
  })");
  ASSERT_EQ(cfg.variants.size(), 2u);
  EXPECT_EQ(cfg.variants[0].model.arch.hidden, (std::vector<int>{8, 8}));
  EXPECT_EQ(cfg.variants[1].model.arch.hidden, std::vector<int>{4});
  EXPECT_EQ(cfg.variants[1].model.arch.activation, Activation::ReLU);
  EXPECT_EQ(cfg.variants[1].train.iterations, 7);
  EXPECT_GT(cfg.variants[1].train.t_lo, 0.99);
  EXPECT_NE(config_error(R"({"dataset": {"kind": "mog1d"}, "variants": [{"name": "x"}, {"name": "x"}]})").find("duplicate"),
            std::string::npos);
}

TEST(Config, CrossChecks) {
  EXPECT_NE(config_error(R"({"dataset": {"kind": "mog_nd", "n": 100}, "train": {"batch": 2000}})").find("train.batch"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"dataset": {"kind": "spiral"}, "diagnostics": {"mae": {}}})").find("mixture"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"samplers": [{"sampler": "ode"}]})").find("dataset"), std::string::npos);
  EXPECT_NE(config_error("[1, 2]").find("object"), std::string::npos);
  EXPECT_NE(config_error("{").find("JSON"), std::string::npos);
}

TEST(Config, OverridesAndHash) {
  const std::string text = R"({"seed": 3, "dataset": {"kind": "mog1d", "n": 10}})";
  const auto a = parse_config(text);
  const auto b = parse_config(R"({"dataset": {"n": 10, "kind": "mog1d"}, "seed": 3})");
  EXPECT_EQ(a.hash(), b.hash());
  ConfigOverrides ov;
  ov.seed = 9;
  ov.output_dir = "elsewhere";
  const auto c = parse_config(text, ov);
  EXPECT_EQ(c.seed.value, 9u);
  EXPECT_EQ(c.output_dir, fs::path("elsewhere"));
  EXPECT_NE(c.hash(), a.hash());
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Config, EveryPresetParses) {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(COLLAPSE_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
  }
  EXPECT_GE(seen, 6);
}

TEST(Experiment, RerunGivesIdenticalCsvBytes) {
  ConfigOverrides ov;
  ov.output_dir = fresh_dir("run_a");
  const auto a = run_experiment(load_config(fs::path(COLLAPSE_CONFIG_DIR) / "smoke.json", ov));
  ov.output_dir = fresh_dir("run_b");
  const auto b = run_experiment(load_config(fs::path(COLLAPSE_CONFIG_DIR) / "smoke.json", ov));

  int compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    const fs::path rel = fs::relative(entry.path(), a);
    ASSERT_TRUE(fs::exists(b / rel)) << rel;
    EXPECT_EQ(slurp(entry.path()), slurp(b / rel)) << rel;
    ++compared;
  }
  for (const char* f : {"data/train.csv", "tid.csv", "mae.csv", "errcov.csv", "density.csv", "velocity_grid.csv",
                        "seesaw.csv", "manifest.json", "models/base.json"}) {
    EXPECT_TRUE(fs::exists(a / f)) << f;
  }
  EXPECT_GE(compared, 8);
  EXPECT_FALSE(fs::exists(a / ".lock"));
}

TEST(Experiment, LockBlocksSecondRun) {
  const fs::path dir = fresh_dir("locked");
  fs::create_directories(dir);
  std::ofstream(dir / ".lock") << "held";
  ConfigOverrides ov;
  ov.output_dir = dir;
  EXPECT_THROW(run_experiment(load_config(fs::path(COLLAPSE_CONFIG_DIR) / "seesaw_closed_form.json", ov)), Error);
}

#ifdef COLLAPSE_LAB_EXE

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(COLLAPSE_LAB_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, ExitCodes) {
  const fs::path dir = fresh_dir("cli");
  fs::create_directories(dir);
  EXPECT_EQ(run_cli("seesaw --p-max 5 --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "seesaw.csv"));
  EXPECT_EQ(run_cli(""), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("run"), 2);
  EXPECT_EQ(run_cli("run --config " + (dir / "missing.json").string()), 2);

  std::ofstream(dir / "bad.json") << R"({"dataset": {"kind": "mog1d"}, "samplers": [{"sampler": "nope"}]})";
  EXPECT_EQ(run_cli("run --config " + (dir / "bad.json").string()), 2);

  // Valid config, but the sample stage has no trained model to read back.
  std::ofstream(dir / "ok.json") << R"({"output_dir": ")" + (dir / "empty").string() +
                                        R"(", "dataset": {"kind": "mog1d", "n": 100}, "model": {}, "train": {"batch": 10}, "samplers": [{"sampler": "ode"}]})";
  EXPECT_EQ(run_cli("sample --config " + (dir / "ok.json").string()), 3);
}

TEST(Cli, StandaloneTid) {
  const fs::path dir = fresh_dir("cli_tid");
  fs::create_directories(dir);
  std::ofstream(dir / "a.csv") << "dim0\n0\n0.05\n1\n";
  std::ofstream(dir / "b.csv") << "dim0\n0\n0.01\n0.02\n";
  const fs::path out = dir / "tid.csv";
  EXPECT_EQ(run_cli("tid --train " + (dir / "a.csv").string() + " --sampled " + (dir / "b.csv").string() +
                    " --eps 0.1 --output " + out.string()),
            0);
  const std::string text = slurp(out);
  EXPECT_EQ(text.substr(0, text.find('\n')), "epsilon,hill_train,hill_sampled,alpha_train,alpha_sampled,tid");
  EXPECT_EQ(run_cli("tid --train " + (dir / "a.csv").string()), 2);
}

#endif
