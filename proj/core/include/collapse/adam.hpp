#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace collapse {

struct ScoreModel;

struct AdamConfig {
  double learning_rate = 5e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment accumulators mirroring the parameter blocks.
struct AdamState {
  std::vector<std::vector<double>> first;
  std::vector<std::vector<double>> second;
  std::int64_t step = 0;

  static AdamState for_shapes(const std::vector<std::span<const double>>& params);
  static AdamState for_model(const ScoreModel& model);
};

/// Bias-corrected Adam update, in place.
void adam_step(const std::vector<std::span<double>>& params,
               const std::vector<std::span<const double>>& grads, AdamState& state,
               const AdamConfig& cfg);
void adam_step(ScoreModel& params, const ScoreModel& grads, AdamState& state, const AdamConfig& cfg);

}  // namespace collapse
