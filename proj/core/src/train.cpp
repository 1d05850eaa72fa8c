#include "collapse/train.hpp"

#include <fmt/format.h>

#include "collapse/error.hpp"

namespace collapse {

void TrainConfig::validate(Eigen::Index dataset_size) const {
  if (!(learning_rate > 0.0)) throw ParameterError("train.learning_rate must be > 0");
  if (batch_size < 1) throw ParameterError("train.batch_size must be >= 1");
  if (iterations < 1) throw ParameterError("train.iterations must be >= 1");
  if (!(t_lo >= 0.0 && t_lo < t_hi && t_hi <= 1.0)) {
    throw ParameterError(fmt::format("train.t_range ({}, {}) must satisfy 0 <= lo < hi <= 1", t_lo, t_hi));
  }
  if (dataset_size < 1) throw ParameterError("training dataset is empty");
  if (batch_size > dataset_size) {
    throw ParameterError(fmt::format("train.batch_size {} exceeds dataset size {}", batch_size, dataset_size));
  }
}

TrainResult train(ScoreModel model, const Dataset& data, const TrainConfig& cfg,
                  const TrainObserver& observer) {
  cfg.validate(data.size());
  model.validate();
  if (data.dim() != model.data_dim()) {
    throw ParameterError(fmt::format("dataset dimension {} does not match model dimension {}",
                                     data.dim(), model.data_dim()));
  }
  TrainResult result;
  result.state = AdamState::for_model(model);
  result.loss_history.reserve(static_cast<std::size_t>(cfg.iterations));
  const AdamConfig adam = cfg.adam();
  Matrix batch(cfg.batch_size, data.dim());
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const Seed iter_seed = cfg.seed.child(static_cast<std::uint64_t>(iter));
    Rng picker(iter_seed.child(0));
    for (int b = 0; b < cfg.batch_size; ++b) {
      batch.row(b) = data.points.row(
          static_cast<Eigen::Index>(picker.below(static_cast<std::uint64_t>(data.size()))));
    }
    auto step = loss_and_grad(model, batch, {cfg.t_lo, cfg.t_hi}, iter_seed.child(1));
    adam_step(model, step.grads, result.state, adam);
    result.loss_history.push_back(step.loss);
    if (observer) observer(iter, step.loss);
  }
  result.model = std::move(model);
  return result;
}

TwoModelResult train_two_model(ScoreModel low, ScoreModel high, const Dataset& data,
                               const TrainConfig& cfg, double t_split, const TrainObserver& observer) {
  if (!(t_split >= cfg.t_lo && t_split < cfg.t_hi)) {
    throw ParameterError(fmt::format("two-model split {} must lie in [{}, {})", t_split, cfg.t_lo, cfg.t_hi));
  }
  TwoModelResult out;
  TrainConfig high_cfg = cfg;
  high_cfg.t_lo = t_split;
  out.high = train(std::move(high), data, high_cfg, observer);
  if (t_split > cfg.t_lo) {
    TrainConfig low_cfg = cfg;
    low_cfg.t_hi = t_split;
    low_cfg.seed = cfg.seed.child(1);
    out.low = train(std::move(low), data, low_cfg, observer);
  } else {
    out.low.model = std::move(low);
    out.low.state = AdamState::for_model(out.low.model);
  }
  out.model = TwoModel{out.low.model, out.high.model, t_split};
  return out;
}

}  // namespace collapse
