#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>

#include "collapse/adam.hpp"
#include "collapse/score_model.hpp"

namespace collapse {

inline constexpr int kCheckpointSchemaVersion = 1;

/// A saved single model or low/high pair, with optional optimiser state.
struct Checkpoint {
  std::variant<ScoreModel, TwoModel> model;
  std::optional<AdamState> state;        ///< single-model checkpoints only
  std::optional<std::uint64_t> train_seed;
};

/// JSON document:
///   {schema_version, kind: "single"|"two_model", schedule: {schedule, beta_min, beta_max},
///    train_seed?, model: {widths, activation, skip_mode, swap_fixed, precision,
///    layers: [{weights: row-major, bias}], skip_nets?: {c1, c2}}, adam?: {step, first, second}}
/// Two-model documents carry {t_split, low, high} in place of `model`.
std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// Throws LoadError naming the offending field; never returns a partial model.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace collapse
