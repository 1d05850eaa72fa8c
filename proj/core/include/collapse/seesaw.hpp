#pragma once

#include <vector>

namespace collapse::seesaw {

/// Orthonormal probabilists' Hermite polynomial He_i at x, normalised so that
/// E[He_i(Z) He_j(Z)] = delta_ij for Z ~ N(0, 1).
double hermite_eval(int i, double x);

/// Gauss-Hermite rule for the standard normal measure: sum_k w_k f(x_k) ~ E f(Z).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  [[nodiscard]] int size() const { return static_cast<int>(nodes.size()); }
};

QuadratureRule gauss_hermite(int nodes);

/// Shared 200-node rule.
const QuadratureRule& default_rule();

inline constexpr int kDefaultNodes = 200;
/// Tail truncation for sum_{i>p} alpha_i^2.
inline constexpr int kMaxDegree = 40;

/// Low-noise target s(x) = tanh(m x) m - x with m = exp(-t).
double target_score(double t, double x);

/// Hermite coefficients alpha_1..alpha_p of target_score(t, .).
/// Throws ConfigError when 4p exceeds the node count of `rule`.
std::vector<double> target_coeffs(double t, int p, const QuadratureRule& rule = default_rule());

/// Coefficients theta_1..theta_p of f(x) = sum_i theta_i He_i(x).
/// The coefficient of the bare t term is pinned to 0.
struct HermiteExpansion {
  std::vector<double> coeffs;
  double t_coeff = 0.0;

  [[nodiscard]] int degree() const { return static_cast<int>(coeffs.size()); }
  [[nodiscard]] double operator()(double x) const;
};

/// Joint minimiser for the low-noise (t = 0) and high-noise (s = -x) targets:
/// the mean of the two separate Hermite projections.
HermiteExpansion optimal_theta(int p);

struct SeesawLosses {
  double low_noise;   ///< l1: error against tanh(x) - x
  double high_noise;  ///< l2: error against -x
};

/// Closed-form losses of optimal_theta(p). Throws ParameterError for p < 1 or p > kMaxDegree.
SeesawLosses seesaw_losses(int p);

}  // namespace collapse::seesaw
