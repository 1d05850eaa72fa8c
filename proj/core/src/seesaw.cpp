#include "collapse/seesaw.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "collapse/error.hpp"

namespace collapse::seesaw {

double hermite_eval(int i, double x) {
  if (i < 0) throw ParameterError(fmt::format("Hermite degree {} must be >= 0", i));
  double prev = 1.0;
  if (i == 0) return prev;
  double cur = x;
  for (int n = 1; n < i; ++n) {
    const double next = (x * cur - std::sqrt(static_cast<double>(n)) * prev) / std::sqrt(n + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

QuadratureRule gauss_hermite(int nodes) {
  if (nodes < 1) throw ParameterError("quadrature needs >= 1 node");
  // Golub-Welsch: eigenvalues of the Jacobi matrix of the orthonormal recurrence.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(nodes);
  Eigen::VectorXd sub(std::max(nodes - 1, 0));
  for (int k = 1; k < nodes; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  std::vector<double> x(solver.eigenvalues().data(), solver.eigenvalues().data() + nodes);

  // Newton polish on He_n and exact +-x symmetry.
  for (double& node : x) {
    for (int iter = 0; iter < 3; ++iter) {
      const double value = hermite_eval(nodes, node);
      const double slope = std::sqrt(static_cast<double>(nodes)) * hermite_eval(nodes - 1, node);
      if (slope == 0.0) break;
      node -= value / slope;
    }
  }
  std::sort(x.begin(), x.end());
  for (int k = 0; k < nodes / 2; ++k) {
    const double m = 0.5 * (x[nodes - 1 - k] - x[k]);
    x[k] = -m;
    x[nodes - 1 - k] = m;
  }
  if (nodes % 2 == 1) x[nodes / 2] = 0.0;

  // Christoffel weights w_k = 1 / sum_{j<n} He_j(x_k)^2.
  QuadratureRule rule;
  rule.nodes = x;
  rule.weights.resize(nodes);
  for (int k = 0; k < nodes; ++k) {
    double prev = 1.0;
    double cur = x[k];
    double acc = 1.0 + (nodes > 1 ? cur * cur : 0.0);
    for (int n = 1; n + 1 < nodes; ++n) {
      const double next = (x[k] * cur - std::sqrt(static_cast<double>(n)) * prev) / std::sqrt(n + 1.0);
      prev = cur;
      cur = next;
      acc += cur * cur;
    }
    rule.weights[k] = 1.0 / acc;
  }
  for (int k = 0; k < nodes / 2; ++k) rule.weights[nodes - 1 - k] = rule.weights[k];
  return rule;
}

const QuadratureRule& default_rule() {
  static const QuadratureRule rule = gauss_hermite(kDefaultNodes);
  return rule;
}

double target_score(double t, double x) {
  const double m = std::exp(-t);
  return std::tanh(m * x) * m - x;
}

std::vector<double> target_coeffs(double t, int p, const QuadratureRule& rule) {
  if (!(t >= 0.0)) throw ParameterError(fmt::format("target time {} must be >= 0", t));
  if (p < 1) throw ParameterError(fmt::format("expansion degree {} must be >= 1", p));
  if (4 * p > rule.size()) {
    throw ConfigError(fmt::format(
        "{}-node quadrature cannot resolve degree {} (need at least {} nodes)", rule.size(), p, 4 * p));
  }
  std::vector<double> coeffs(static_cast<std::size_t>(p), 0.0);
  for (int k = 0; k < rule.size(); ++k) {
    const double x = rule.nodes[k];
    const double wf = rule.weights[k] * target_score(t, x);
    double prev = 1.0;
    double cur = x;
    coeffs[0] += wf * cur;
    for (int n = 1; n < p; ++n) {
      const double next = (x * cur - std::sqrt(static_cast<double>(n)) * prev) / std::sqrt(n + 1.0);
      prev = cur;
      cur = next;
      coeffs[n] += wf * cur;
    }
  }
  return coeffs;
}

double HermiteExpansion::operator()(double x) const {
  double acc = 0.0;
  for (int i = 0; i < degree(); ++i) acc += coeffs[i] * hermite_eval(i + 1, x);
  return acc;
}

HermiteExpansion optimal_theta(int p) {
  if (p < 1) throw ParameterError(fmt::format("expansion degree {} must be >= 1", p));
  HermiteExpansion out;
  out.coeffs = target_coeffs(0.0, p);
  // High-noise target -x has alpha_1 = -1 and nothing else.
  out.coeffs[0] -= 1.0;
  for (double& c : out.coeffs) c *= 0.5;
  return out;
}

SeesawLosses seesaw_losses(int p) {
  if (p < 1 || p > kMaxDegree) {
    throw ParameterError(fmt::format("see-saw degree {} outside [1, {}]", p, kMaxDegree));
  }
  const auto alpha = target_coeffs(0.0, kMaxDegree);
  SeesawLosses out{0.0, 0.0};
  // theta_1 = (alpha_1 - 1) / 2 misses both targets by (1 + alpha_1) / 2 on He_1.
  const double first = 0.25 * (1.0 + alpha[0]) * (1.0 + alpha[0]);
  out.low_noise = first;
  out.high_noise = first;
  for (int i = 2; i <= kMaxDegree; ++i) {
    const double a2 = alpha[i - 1] * alpha[i - 1];
    out.low_noise += (i <= p ? 0.25 : 1.0) * a2;
    if (i <= p) out.high_noise += 0.25 * a2;
  }
  return out;
}

}  // namespace collapse::seesaw
