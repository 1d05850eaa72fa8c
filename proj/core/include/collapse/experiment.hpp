#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "collapse/checkpoint.hpp"
#include "collapse/config.hpp"
#include "collapse/error.hpp"
#include "collapse/score_source.hpp"

namespace collapse {

/// A pipeline stage failed; `stage()` names it. Artifacts written so far are kept.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message);
  [[nodiscard]] const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct Stages {
  bool gen = true;
  bool train = true;
  bool sample = true;
  bool tid = true;
  bool diagnose = true;
  bool seesaw = true;

  static Stages all() { return {}; }
  static Stages none() { return {false, false, false, false, false, false}; }
};

/// Training data for the config: generator draw or mixture sample from seed.child(0).
Dataset training_data(const ExperimentConfig& cfg);

struct TrainedVariant {
  std::string name;
  Checkpoint checkpoint;
  std::vector<double> loss_history;
};

/// Initialises from seed.child(2) and trains one variant (single or two-model).
TrainedVariant train_variant(const ExperimentConfig& cfg, const VariantConfig& variant, const Dataset& data,
                             std::ostream* log = nullptr);

ScoreSource source_from_checkpoint(const Checkpoint& ckpt, double t_min = kDefaultTimeFloor);

/// Runs the selected stages into cfg.output_dir and returns it. Earlier
/// artifacts are read back from the directory when their stage is skipped.
/// Holds `<output_dir>/.lock` for the duration.
std::filesystem::path run_experiment(const ExperimentConfig& cfg, const Stages& stages = Stages::all(),
                                     std::ostream* log = nullptr);

/// `p,ell1,ell2` rows for p = 1..p_max.
void write_seesaw_csv(int p_max, const std::filesystem::path& path);

std::string library_version();

}  // namespace collapse
