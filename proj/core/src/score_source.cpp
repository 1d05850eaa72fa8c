#include "collapse/score_source.hpp"

#include <fmt/format.h>

#include "collapse/error.hpp"

namespace collapse {

ScoreSource::ScoreSource(Impl impl, NoiseSchedule schedule, int dim)
    : impl_(std::move(impl)), schedule_(schedule), dim_(dim) {}

ScoreSource ScoreSource::oracle(MogSpec spec, NoiseSchedule schedule) {
  spec.validate();
  const int dim = spec.dim();
  ScoreSource src(Oracle{std::move(spec)}, schedule, dim);
  src.t_min_ = 0.0;
  return src;
}

ScoreSource ScoreSource::model(ScoreModel model) {
  model.validate();
  const auto schedule = model.schedule;
  const int dim = model.data_dim();
  return {std::make_shared<const ScoreModel>(std::move(model)), schedule, dim};
}

ScoreSource ScoreSource::two_model(TwoModel model) {
  model.low.validate();
  model.high.validate();
  if (model.low.data_dim() != model.high.data_dim() || !(model.low.schedule == model.high.schedule)) {
    throw ParameterError("two-model halves disagree on dimension or schedule");
  }
  const auto schedule = model.high.schedule;
  const int dim = model.high.data_dim();
  return {std::make_shared<const TwoModel>(std::move(model)), schedule, dim};
}

ScoreSource ScoreSource::zero(NoiseSchedule schedule, int dim) {
  ScoreSource src(Zero{}, schedule, dim);
  src.t_min_ = 0.0;
  return src;
}

ScoreSource ScoreSource::from_eps(EpsFn fn, NoiseSchedule schedule, int dim) {
  return {std::move(fn), schedule, dim};
}

bool ScoreSource::is_oracle() const { return std::holds_alternative<Oracle>(impl_); }

const MogSpec* ScoreSource::mixture() const {
  const auto* o = std::get_if<Oracle>(&impl_);
  return o ? &o->spec : nullptr;
}

void ScoreSource::check(const Matrix& x, double t) const {
  if (x.cols() != dim_) {
    throw ParameterError(fmt::format("score source has dimension {}, points have {}", dim_, x.cols()));
  }
  if (t < t_min_) {
    throw SingularityError(fmt::format("score requested at t = {} below t_min = {}", t, t_min_));
  }
}

Matrix ScoreSource::score(const Matrix& x, double t) const {
  check(x, t);
  if (const auto* o = std::get_if<Oracle>(&impl_)) return mog_score(o->spec, schedule_, x, t);
  if (std::holds_alternative<Zero>(impl_)) return Matrix::Zero(x.rows(), x.cols());
  const double sigma = schedule_.sigma(t);
  if (sigma == 0.0) throw SingularityError("sigma_t = 0; score undefined");
  return -eps(x, t) / sigma;
}

Matrix ScoreSource::eps(const Matrix& x, double t) const {
  check(x, t);
  if (const auto* m = std::get_if<std::shared_ptr<const ScoreModel>>(&impl_)) return forward(**m, x, t);
  if (const auto* p = std::get_if<std::shared_ptr<const TwoModel>>(&impl_)) return forward(**p, x, t);
  if (const auto* f = std::get_if<EpsFn>(&impl_)) return (*f)(x, t);
  return -schedule_.sigma(t) * score(x, t);
}

Matrix ScoreSource::velocity(const Matrix& x, double t) const {
  const double rate = schedule_.log_alpha_rate(t);
  const double g2 = schedule_.diffusion_sq(t);
  return rate * x - 0.5 * g2 * score(x, t);
}

}  // namespace collapse
