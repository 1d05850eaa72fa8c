#include "collapse/schedule.hpp"

#include <cmath>

#include <fmt/format.h>

#include "collapse/error.hpp"

namespace collapse {

NoiseSchedule::NoiseSchedule(ScheduleKind kind, double beta_min, double beta_max)
    : kind_(kind), beta_min_(beta_min), beta_max_(beta_max) {
  if (kind != ScheduleKind::Linear && !(beta_min > 0.0 && beta_min < beta_max)) {
    throw ParameterError(
        fmt::format("schedule requires 0 < beta_min < beta_max, got ({}, {})", beta_min, beta_max));
  }
}

NoiseSchedule NoiseSchedule::vp(double beta_min, double beta_max) {
  return {ScheduleKind::VP, beta_min, beta_max};
}

NoiseSchedule NoiseSchedule::sub_vp(double beta_min, double beta_max) {
  return {ScheduleKind::SubVP, beta_min, beta_max};
}

NoiseSchedule NoiseSchedule::linear() { return {ScheduleKind::Linear, 0.0, 0.0}; }

NoiseSchedule NoiseSchedule::from_name(const std::string& name, double beta_min, double beta_max) {
  if (name == "vp") return vp(beta_min, beta_max);
  if (name == "subvp") return sub_vp(beta_min, beta_max);
  if (name == "linear") return linear();
  throw ParameterError(fmt::format("unknown schedule '{}' (expected vp, subvp or linear)", name));
}

std::string NoiseSchedule::name() const {
  switch (kind_) {
    case ScheduleKind::VP: return "vp";
    case ScheduleKind::SubVP: return "subvp";
    case ScheduleKind::Linear: return "linear";
  }
  return "?";
}

void NoiseSchedule::check_time(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw ParameterError(fmt::format("time {} outside [0, 1]", t));
  }
}

double NoiseSchedule::beta(double t) const {
  if (kind_ == ScheduleKind::Linear) return 0.0;
  return beta_min_ + t * (beta_max_ - beta_min_);
}

double NoiseSchedule::integrated_beta(double t) const {
  if (kind_ == ScheduleKind::Linear) return 0.0;
  return t * beta_min_ + 0.5 * t * t * (beta_max_ - beta_min_);
}

ScheduleCoeffs NoiseSchedule::coeffs(double t) const {
  check_time(t);
  switch (kind_) {
    case ScheduleKind::VP: {
      const double half_b = 0.5 * integrated_beta(t);
      const double alpha = std::exp(-half_b);
      // 1 - alpha^2 = -expm1(-B), accurate near t = 0.
      return {alpha, std::sqrt(-std::expm1(-2.0 * half_b))};
    }
    case ScheduleKind::SubVP: {
      const double b = integrated_beta(t);
      return {std::exp(-0.5 * b), -std::expm1(-b)};
    }
    case ScheduleKind::Linear:
      return {1.0 - t, t};
  }
  return {0.0, 0.0};
}

double NoiseSchedule::log_alpha_rate(double t) const {
  check_time(t);
  if (kind_ == ScheduleKind::Linear) {
    if (t >= 1.0) throw SingularityError("linear schedule has alpha_t = 0 at t = 1");
    return -1.0 / (1.0 - t);
  }
  return -0.5 * beta(t);
}

double NoiseSchedule::diffusion_sq(double t) const {
  const double rate = log_alpha_rate(t);
  const auto [alpha, sigma] = coeffs(t);
  double dsigma_sq = 0.0;
  switch (kind_) {
    case ScheduleKind::VP:
      dsigma_sq = -2.0 * alpha * alpha * rate;
      break;
    case ScheduleKind::SubVP:
      dsigma_sq = 2.0 * sigma * beta(t) * std::exp(-integrated_beta(t));
      break;
    case ScheduleKind::Linear:
      dsigma_sq = 2.0 * t;
      break;
  }
  return dsigma_sq - 2.0 * rate * sigma * sigma;
}

double NoiseSchedule::log_snr(double t) const {
  const auto [alpha, sigma] = coeffs(t);
  return std::log(alpha) - std::log(sigma);
}

double NoiseSchedule::time_for_log_snr(double lambda, double lo, double hi) const {
  // Bisection to full double resolution; lambda(t) is strictly decreasing.
  for (int iter = 0; iter < 200 && hi - lo > 0.0; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (log_snr(mid) > lambda) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

DriftDiffusion NoiseSchedule::drift_diffusion(const Vector& x, double t) const {
  return {log_alpha_rate(t) * x, std::sqrt(diffusion_sq(t))};
}

double NoiseSchedule::max_time() const {
  return kind_ == ScheduleKind::Linear ? 1.0 - kLinearEndClamp : 1.0;
}

Perturbed perturb(const NoiseSchedule& sched, const Vector& x0, double t, Seed seed) {
  const auto [alpha, sigma] = sched.coeffs(t);
  Rng rng(seed);
  Vector eps = rng.normal_vector(x0.size());
  if (sigma == 0.0) return {x0, std::move(eps)};
  Vector x_t = alpha * x0 + sigma * eps;
  return {std::move(x_t), std::move(eps)};
}

}  // namespace collapse
