#pragma once

#include <functional>
#include <vector>

#include "collapse/adam.hpp"
#include "collapse/dataset.hpp"
#include "collapse/score_model.hpp"

namespace collapse {

struct TrainConfig {
  double learning_rate = 5e-3;
  int batch_size = 2000;
  int iterations = 10000;
  double t_lo = kDefaultTimeFloor;
  double t_hi = 1.0;
  Seed seed{0};
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  /// Throws ParameterError naming the offending field.
  void validate(Eigen::Index dataset_size) const;
  [[nodiscard]] AdamConfig adam() const { return {learning_rate, beta1, beta2, adam_eps}; }
};

/// Width of the high-noise-only training window (1 - delta, 1).
inline constexpr double kHighNoiseDelta = 1e-6;

struct TrainResult {
  ScoreModel model;
  AdamState state;
  std::vector<double> loss_history;
};

/// Optional per-iteration observer (iteration, loss).
using TrainObserver = std::function<void(int, double)>;

/// Adam on the DSM loss. Each iteration draws its minibatch (with replacement),
/// times and noise from cfg.seed.child(iteration).
TrainResult train(ScoreModel model, const Dataset& data, const TrainConfig& cfg,
                  const TrainObserver& observer = {});

struct TwoModelResult {
  TwoModel model;
  TrainResult low;
  TrainResult high;
};

/// Trains `low` on t ~ U(cfg.t_lo, t_split) and `high` on U(t_split, cfg.t_hi).
/// `high` uses cfg.seed unchanged; `low` uses cfg.seed.child(1) for its streams.
/// t_split == cfg.t_lo leaves `low` untrained and routes every query to `high`.
TwoModelResult train_two_model(ScoreModel low, ScoreModel high, const Dataset& data,
                               const TrainConfig& cfg, double t_split,
                               const TrainObserver& observer = {});

}  // namespace collapse
