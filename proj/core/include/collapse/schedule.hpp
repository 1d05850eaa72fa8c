#pragma once

#include <string>

#include "collapse/rng.hpp"
#include "collapse/types.hpp"

namespace collapse {

enum class ScheduleKind { VP, SubVP, Linear };

struct ScheduleCoeffs {
  double alpha;
  double sigma;
};

struct DriftDiffusion {
  Vector drift;
  double diffusion;
};

/// Forward noising process x_t = alpha_t x_0 + sigma_t eps on t in [0, 1].
///
///   VP      alpha = exp(-B(t)/2),  sigma = sqrt(1 - alpha^2)
///   SubVP   alpha = exp(-B(t)/2),  sigma = 1 - exp(-B(t))
///   Linear  alpha = 1 - t,         sigma = t
///
/// with B(t) = int_0^t beta = t beta_min + t^2 (beta_max - beta_min) / 2.
/// Drift and diffusion follow from (alpha, sigma) alone:
///   f(x, t) = (d log alpha / dt) x,   g^2 = d(sigma^2)/dt - 2 (d log alpha / dt) sigma^2,
/// so every schedule shares one sampler code path.
class NoiseSchedule {
 public:
  static NoiseSchedule vp(double beta_min = 0.1, double beta_max = 20.0);
  static NoiseSchedule sub_vp(double beta_min = 0.1, double beta_max = 20.0);
  static NoiseSchedule linear();
  static NoiseSchedule from_name(const std::string& name, double beta_min = 0.1,
                                 double beta_max = 20.0);

  [[nodiscard]] ScheduleKind kind() const { return kind_; }
  [[nodiscard]] double beta_min() const { return beta_min_; }
  [[nodiscard]] double beta_max() const { return beta_max_; }
  [[nodiscard]] std::string name() const;

  /// beta(t) of the VP/SubVP families (0 for Linear).
  [[nodiscard]] double beta(double t) const;
  [[nodiscard]] double integrated_beta(double t) const;

  [[nodiscard]] ScheduleCoeffs coeffs(double t) const;
  [[nodiscard]] double alpha(double t) const { return coeffs(t).alpha; }
  [[nodiscard]] double sigma(double t) const { return coeffs(t).sigma; }

  /// d log(alpha_t) / dt. Throws SingularityError where alpha_t = 0.
  [[nodiscard]] double log_alpha_rate(double t) const;
  /// g(t)^2. Throws SingularityError where alpha_t = 0.
  [[nodiscard]] double diffusion_sq(double t) const;

  /// Log signal-to-noise half ratio lambda = log(alpha / sigma).
  [[nodiscard]] double log_snr(double t) const;
  /// Inverse of log_snr on [lo, hi] (lambda is strictly decreasing in t).
  [[nodiscard]] double time_for_log_snr(double lambda, double lo, double hi) const;

  [[nodiscard]] DriftDiffusion drift_diffusion(const Vector& x, double t) const;

  /// Largest usable start time: 1 for VP/SubVP, 1 - 1e-6 for Linear.
  [[nodiscard]] double max_time() const;

  friend bool operator==(const NoiseSchedule&, const NoiseSchedule&) = default;

 private:
  NoiseSchedule(ScheduleKind kind, double beta_min, double beta_max);
  void check_time(double t) const;

  ScheduleKind kind_;
  double beta_min_;
  double beta_max_;
};

struct Perturbed {
  Vector x_t;
  Vector eps;
};

/// Samples eps ~ N(0, I) and returns (alpha_t x0 + sigma_t eps, eps).
Perturbed perturb(const NoiseSchedule& sched, const Vector& x0, double t, Seed seed);

inline constexpr double kDefaultTimeFloor = 1e-3;
inline constexpr double kLinearEndClamp = 1e-6;

}  // namespace collapse
