#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "collapse/dataset.hpp"
#include "collapse/mlp.hpp"
#include "collapse/schedule.hpp"

namespace collapse {

enum class SkipMode { None, Learned, Fixed };

SkipMode skip_mode_from_name(const std::string& name);
std::string skip_mode_name(SkipMode mode);

/// Architecture of an epsilon-predictor. `hidden` lists hidden-layer widths,
/// so {1000, 1000} is the two-layer width-1000 network.
struct ModelArch {
  std::vector<int> hidden = {100, 100, 100};
  Activation activation = Activation::Tanh;
  SkipMode skip = SkipMode::None;
  /// Fixed skip puts sigma_t on x_t by default; true swaps to (1 - sigma_t) x_t + sigma_t net.
  bool swap_fixed = false;
  /// Hidden widths of the learned coefficient networks c1(t), c2(t).
  std::vector<int> skip_hidden = {30, 30};
  Precision precision = Precision::Float64;
};

/// Epsilon-predictor eps_hat(x_t, t). The inner network reads [x_t, t]; the
/// skip wrapper combines it with x_t:
///   None     eps_hat = net
///   Learned  eps_hat = c1(t) x_t + c2(t) net
///   Fixed    eps_hat = sigma_t x_t + (1 - sigma_t) net
/// The schedule travels with the model because the fixed wrapper needs sigma_t.
struct ScoreModel {
  Mlp inner;
  SkipMode skip = SkipMode::None;
  std::optional<Mlp> c1;
  std::optional<Mlp> c2;
  bool swap_fixed = false;
  NoiseSchedule schedule = NoiseSchedule::vp();
  Precision precision = Precision::Float64;

  static ScoreModel create(const ModelArch& arch, int data_dim, const NoiseSchedule& schedule,
                           Seed seed);

  [[nodiscard]] int data_dim() const { return inner.output_dim(); }
  [[nodiscard]] ModelArch arch() const;

  /// Same structure, all parameters zero; used as the gradient container.
  [[nodiscard]] ScoreModel zeros_like() const;
  void validate() const;

  /// Flat views of every parameter block in a fixed order (inner, c1, c2).
  [[nodiscard]] std::vector<std::span<double>> parameters();
  [[nodiscard]] std::vector<std::span<const double>> parameters() const;
  [[nodiscard]] std::size_t parameter_count() const;
};

/// Row-batched prediction: x is B x d, t holds one time per row.
Matrix forward(const ScoreModel& model, const Matrix& x, const Vector& t);
Matrix forward(const ScoreModel& model, const Matrix& x, double t);
Vector forward(const ScoreModel& model, const Vector& x, double t);

/// Low-noise and high-noise networks joined at t_split: queries with
/// t < t_split go to `low`, the rest to `high`.
struct TwoModel {
  ScoreModel low;
  ScoreModel high;
  double t_split = 0.6;

  [[nodiscard]] const ScoreModel& route(double t) const { return t < t_split ? low : high; }
};

Matrix forward(const TwoModel& model, const Matrix& x, double t);

struct LossAndGrad {
  double loss = 0.0;
  ScoreModel grads;
};

/// DSM minibatch loss mean_b ||eps_hat(alpha x0_b + sigma eps_b, t_b) - eps_b||^2 and its exact
/// gradient with respect to every parameter, for explicit times and noise.
LossAndGrad loss_and_grad(const ScoreModel& model, const Matrix& x0, const Vector& t,
                          const Matrix& eps);

/// Same loss with t ~ U(t_range) and eps ~ N(0, I) drawn from `seed`.
LossAndGrad loss_and_grad(const ScoreModel& model, const Matrix& batch,
                          std::pair<double, double> t_range, Seed seed);

/// Loss only (no gradient); used by finite-difference checks.
double dsm_loss(const ScoreModel& model, const Matrix& x0, const Vector& t, const Matrix& eps);

/// Any epsilon-predictor evaluated on a block of points at one time.
using EpsPredictor = std::function<Matrix(const Matrix& x, double t)>;

/// Monte-Carlo DSM loss at a fixed t with `n_mc` noise draws per data point.
double eval_dsm_at(const EpsPredictor& predictor, const NoiseSchedule& sched, const Matrix& data,
                   double t, int n_mc, Seed seed);
double eval_dsm_at(const ScoreModel& model, const Matrix& data, double t, int n_mc, Seed seed);

/// score = -eps_hat / sigma_t. Throws SingularityError for t < t_min.
Matrix model_score(const ScoreModel& model, const Matrix& x, double t,
                   double t_min = kDefaultTimeFloor);
/// f(x, t) - g(t)^2 / 2 * model_score.
Matrix model_velocity(const ScoreModel& model, const Matrix& x, double t,
                      double t_min = kDefaultTimeFloor);

}  // namespace collapse
