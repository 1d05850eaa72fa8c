#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <variant>

#include "collapse/mog.hpp"
#include "collapse/score_model.hpp"

namespace collapse {

/// Anything that provides a score field: the closed-form mixture oracle, a
/// trained single or two-model predictor, or a user-supplied epsilon function.
/// The three views are tied together by
///   eps = -sigma_t * score,   velocity = f(x, t) - g(t)^2 / 2 * score.
class ScoreSource {
 public:
  /// eps_hat(x, t) on a block of points sharing one time.
  using EpsFn = std::function<Matrix(const Matrix& x, double t)>;

  static ScoreSource oracle(MogSpec spec, NoiseSchedule schedule);
  static ScoreSource model(ScoreModel model);
  static ScoreSource two_model(TwoModel model);
  /// Score identically zero (velocity reduces to the drift).
  static ScoreSource zero(NoiseSchedule schedule, int dim);
  static ScoreSource from_eps(EpsFn fn, NoiseSchedule schedule, int dim);

  [[nodiscard]] const NoiseSchedule& schedule() const { return schedule_; }
  [[nodiscard]] int dim() const { return dim_; }
  /// Times below t_min are rejected for learned sources (sigma_t -> 0).
  [[nodiscard]] double t_min() const { return t_min_; }
  void set_t_min(double t_min) { t_min_ = t_min; }

  [[nodiscard]] bool is_oracle() const;
  /// Mixture behind an oracle source; nullptr otherwise.
  [[nodiscard]] const MogSpec* mixture() const;

  [[nodiscard]] Matrix score(const Matrix& x, double t) const;
  [[nodiscard]] Matrix eps(const Matrix& x, double t) const;
  [[nodiscard]] Matrix velocity(const Matrix& x, double t) const;

 private:
  struct Oracle {
    MogSpec spec;
  };
  struct Zero {};
  using Impl = std::variant<Oracle, std::shared_ptr<const ScoreModel>, std::shared_ptr<const TwoModel>,
                            Zero, EpsFn>;

  ScoreSource(Impl impl, NoiseSchedule schedule, int dim);
  void check(const Matrix& x, double t) const;

  Impl impl_;
  NoiseSchedule schedule_;
  int dim_;
  double t_min_ = kDefaultTimeFloor;
};

}  // namespace collapse
