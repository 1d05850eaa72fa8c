#include "collapse/adam.hpp"

#include <cmath>

#include "collapse/error.hpp"
#include "collapse/score_model.hpp"

namespace collapse {

AdamState AdamState::for_shapes(const std::vector<std::span<const double>>& params) {
  AdamState state;
  for (const auto& block : params) {
    state.first.emplace_back(block.size(), 0.0);
    state.second.emplace_back(block.size(), 0.0);
  }
  return state;
}

AdamState AdamState::for_model(const ScoreModel& model) { return for_shapes(model.parameters()); }

void adam_step(const std::vector<std::span<double>>& params,
               const std::vector<std::span<const double>>& grads, AdamState& state,
               const AdamConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.first.size() ||
      params.size() != state.second.size()) {
    throw ParameterError("adam: parameter, gradient and state block counts differ");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (params[b].size() != grads[b].size() || params[b].size() != state.first[b].size() ||
        params[b].size() != state.second[b].size()) {
      throw ParameterError("adam: parameter block shapes differ");
    }
  }
  ++state.step;
  const double correction1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  const double step_size = cfg.learning_rate / correction1;
  const double root_correction2 = std::sqrt(correction2);
  for (std::size_t b = 0; b < params.size(); ++b) {
    auto p = params[b];
    auto g = grads[b];
    auto& m = state.first[b];
    auto& v = state.second[b];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      p[i] -= step_size * m[i] / (std::sqrt(v[i]) / root_correction2 + cfg.eps);
    }
  }
}

void adam_step(ScoreModel& params, const ScoreModel& grads, AdamState& state, const AdamConfig& cfg) {
  adam_step(params.parameters(), grads.parameters(), state, cfg);
}

}  // namespace collapse
