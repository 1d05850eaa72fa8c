#pragma once

#include <vector>

#include "collapse/rng.hpp"
#include "collapse/schedule.hpp"
#include "collapse/types.hpp"

namespace collapse {

/// Isotropic Gaussian mixture sum_k w_k N(mu_k, s_k^2 I).
struct MogSpec {
  std::vector<double> weights;
  Matrix means;  ///< K x d
  std::vector<double> variances;

  [[nodiscard]] int components() const { return static_cast<int>(weights.size()); }
  [[nodiscard]] int dim() const { return static_cast<int>(means.cols()); }

  /// Throws ParameterError unless weights >= 0 sum to 1 (1e-12), variances > 0, shapes agree.
  void validate() const;

  /// Symmetric pair 0.5 N(-1, v I) + 0.5 N(+1, v I) in `dim` dimensions.
  static MogSpec symmetric_pair(int dim, double variance);
};

/// grad_x log p_t(x) of the diffused mixture
///   p_t = sum_k w_k N(alpha_t mu_k, (s_k^2 alpha_t^2 + sigma_t^2) I),
/// with component responsibilities normalised in log space.
Vector mog_score(const MogSpec& spec, const NoiseSchedule& sched, const Vector& x, double t);
/// Row-wise score for a block of points sharing one time.
Matrix mog_score(const MogSpec& spec, const NoiseSchedule& sched, const Matrix& x, double t);

/// log p_t(x) of the diffused mixture.
double mog_log_density(const MogSpec& spec, const NoiseSchedule& sched, const Vector& x, double t);

/// Probability-flow velocity f(x, t) - g(t)^2 / 2 * score.
Vector mog_velocity(const MogSpec& spec, const NoiseSchedule& sched, const Vector& x, double t);
Matrix mog_velocity(const MogSpec& spec, const NoiseSchedule& sched, const Matrix& x, double t);

/// Density of coordinate `dim` of x_t at u.
double mog_marginal_pdf(const MogSpec& spec, const NoiseSchedule& sched, double u, double t, int dim);
/// CDF of coordinate `dim` of x_t at u.
double mog_marginal_cdf(const MogSpec& spec, const NoiseSchedule& sched, double u, double t, int dim);

/// Draws n rows of x_0 from the mixture.
Matrix mog_sample(const MogSpec& spec, Eigen::Index n, Seed seed);

}  // namespace collapse
