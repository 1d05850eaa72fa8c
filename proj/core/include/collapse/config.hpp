#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "collapse/dataset.hpp"
#include "collapse/mog.hpp"
#include "collapse/samplers.hpp"
#include "collapse/score_model.hpp"
#include "collapse/tid.hpp"
#include "collapse/train.hpp"

namespace collapse {

struct DatasetConfig {
  /// Either generator parameters or an explicit mixture (`kind: "mog"`).
  std::optional<DatasetSpec> spec;
  std::optional<MogSpec> mixture;
  std::size_t n = 100000;

  [[nodiscard]] int dimension() const;
  /// Closed-form mixture behind the data, if any.
  [[nodiscard]] std::optional<MogSpec> oracle() const;
  [[nodiscard]] std::string kind() const;
};

struct ModelConfig {
  ModelArch arch;
  /// Two-model training split t'; unset trains a single network.
  std::optional<double> two_model_split;
};

struct VariantConfig {
  std::string name;
  ModelConfig model;
  TrainConfig train;
};

struct SamplerEntry {
  std::string name;
  SamplerConfig config;
  long count = 10000;
  /// > 0 writes a trajectory CSV keeping every stride-th step.
  int record_stride = 0;
};

struct TidConfig {
  bool enabled = true;
  std::vector<double> epsilons = {0.02};
  TidOptions options;
};

struct MaeConfig {
  bool enabled = false;
  std::vector<double> times = {1.0, 0.1};
  long points = 10000;
};

struct ErrCovConfig {
  bool enabled = false;
  std::vector<SamplerKind> samplers = {SamplerKind::ODE, SamplerKind::SDE};
  int steps = 100;
  long chains = 1000;
};

struct DensityConfig {
  bool enabled = false;
  SamplerKind sampler = SamplerKind::ODE;
  int steps = 100;
  long chains = 10000;
  int record_stride = 10;
  int dim = 0;
  int bins = 100;
  std::pair<double, double> range = {-2.5, 2.5};
};

struct VelocityGridConfig {
  bool enabled = false;
  int dim = 0;
  std::pair<double, double> x_range = {-3.0, 3.0};
  std::pair<double, double> t_range = {0.01, 1.0};
  int x_resolution = 101;
  int t_resolution = 100;
};

struct DiagnosticsConfig {
  MaeConfig mae;
  ErrCovConfig error_covariance;
  DensityConfig density;
  VelocityGridConfig velocity_grid;
};

struct SeesawConfig {
  bool enabled = false;
  int p_max = 20;
};

struct ExperimentConfig {
  Seed seed{0};
  std::filesystem::path output_dir = "out";
  NoiseSchedule schedule = NoiseSchedule::vp();
  double t_min = kDefaultTimeFloor;
  std::optional<DatasetConfig> dataset;
  /// One entry per trained model; a config without `variants` has one named "base".
  std::vector<VariantConfig> variants;
  std::vector<SamplerEntry> samplers;
  TidConfig tid;
  DiagnosticsConfig diagnostics;
  SeesawConfig seesaw;
  bool plots = true;
  int threads = 1;

  /// Canonical (sorted-key, compact) JSON of the effective configuration.
  std::string canonical;
  /// FNV-1a 64 of `canonical`, hex.
  [[nodiscard]] std::string hash() const;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
  std::optional<int> threads;
};

/// Parses and validates a JSON document. Throws ConfigError listing every
/// offending key (unknown keys included).
ExperimentConfig parse_config(const std::string& text, const ConfigOverrides& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace collapse
