#include "collapse/mog.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "collapse/error.hpp"

namespace collapse {

void MogSpec::validate() const {
  const auto k = weights.size();
  if (k == 0) throw ParameterError("mixture needs at least one component");
  if (variances.size() != k || static_cast<std::size_t>(means.rows()) != k) {
    throw ParameterError(fmt::format("mixture shape mismatch: {} weights, {} variances, {} means",
                                     k, variances.size(), means.rows()));
  }
  if (means.cols() < 1) throw ParameterError("mixture means must have dimension >= 1");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ParameterError(fmt::format("mixture weight {} is negative", w));
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ParameterError(fmt::format("mixture weights sum to {}, not 1", total));
  }
  for (double v : variances) {
    if (!(v > 0.0)) throw ParameterError(fmt::format("mixture variance {} must be > 0", v));
  }
  if (!means.allFinite()) throw ParameterError("mixture means must be finite");
}

MogSpec MogSpec::symmetric_pair(int dim, double variance) {
  MogSpec spec;
  spec.weights = {0.5, 0.5};
  spec.means = Matrix(2, dim);
  spec.means.row(0).setConstant(-1.0);
  spec.means.row(1).setConstant(1.0);
  spec.variances = {variance, variance};
  spec.validate();
  return spec;
}

namespace {

struct Diffused {
  std::vector<double> log_weights;
  std::vector<double> variances;  // s_k^2 alpha^2 + sigma^2
  double alpha;
};

Diffused diffuse(const MogSpec& spec, const NoiseSchedule& sched, double t) {
  const auto [alpha, sigma] = sched.coeffs(t);
  Diffused out;
  out.alpha = alpha;
  for (int k = 0; k < spec.components(); ++k) {
    out.log_weights.push_back(std::log(spec.weights[k]));
    out.variances.push_back(spec.variances[k] * alpha * alpha + sigma * sigma);
  }
  return out;
}

// Fills log(w_k N(x; alpha mu_k, v_k I)) for each component and returns the log-sum-exp.
template <typename Row>
double component_log_terms(const MogSpec& spec, const Diffused& mix, const Row& x,
                           std::vector<double>& terms) {
  const double d = static_cast<double>(spec.dim());
  terms.resize(spec.components());
  double peak = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < spec.components(); ++k) {
    const double v = mix.variances[k];
    const double sq = (x - mix.alpha * spec.means.row(k)).squaredNorm();
    terms[k] = mix.log_weights[k] - 0.5 * sq / v - 0.5 * d * std::log(2.0 * std::numbers::pi * v);
    peak = std::max(peak, terms[k]);
  }
  double acc = 0.0;
  for (double term : terms) acc += std::exp(term - peak);
  return peak + std::log(acc);
}

template <typename Row, typename Out>
void score_row(const MogSpec& spec, const Diffused& mix, const Row& x, Out&& out,
               std::vector<double>& terms) {
  const double lse = component_log_terms(spec, mix, x, terms);
  out.setZero();
  for (int k = 0; k < spec.components(); ++k) {
    const double resp = std::exp(terms[k] - lse);
    if (resp == 0.0) continue;
    out -= (resp / mix.variances[k]) * (x - mix.alpha * spec.means.row(k));
  }
}

void check_dim(const MogSpec& spec, Eigen::Index cols) {
  if (cols != spec.dim()) {
    throw ParameterError(fmt::format("point dimension {} does not match mixture dimension {}", cols,
                                     spec.dim()));
  }
}

}  // namespace

Vector mog_score(const MogSpec& spec, const NoiseSchedule& sched, const Vector& x, double t) {
  check_dim(spec, x.size());
  const auto mix = diffuse(spec, sched, t);
  std::vector<double> terms;
  RowVector out(x.size());
  score_row(spec, mix, x.transpose(), out, terms);
  return out.transpose();
}

Matrix mog_score(const MogSpec& spec, const NoiseSchedule& sched, const Matrix& x, double t) {
  check_dim(spec, x.cols());
  const auto mix = diffuse(spec, sched, t);
  std::vector<double> terms;
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) score_row(spec, mix, x.row(i), out.row(i), terms);
  return out;
}

double mog_log_density(const MogSpec& spec, const NoiseSchedule& sched, const Vector& x, double t) {
  check_dim(spec, x.size());
  const auto mix = diffuse(spec, sched, t);
  std::vector<double> terms;
  return component_log_terms(spec, mix, x.transpose(), terms);
}

Vector mog_velocity(const MogSpec& spec, const NoiseSchedule& sched, const Vector& x, double t) {
  const double rate = sched.log_alpha_rate(t);
  const double g2 = sched.diffusion_sq(t);
  return rate * x - 0.5 * g2 * mog_score(spec, sched, x, t);
}

Matrix mog_velocity(const MogSpec& spec, const NoiseSchedule& sched, const Matrix& x, double t) {
  const double rate = sched.log_alpha_rate(t);
  const double g2 = sched.diffusion_sq(t);
  return rate * x - 0.5 * g2 * mog_score(spec, sched, x, t);
}

double mog_marginal_pdf(const MogSpec& spec, const NoiseSchedule& sched, double u, double t, int dim) {
  if (dim < 0 || dim >= spec.dim()) {
    throw ParameterError(fmt::format("marginal dimension {} out of range [0, {})", dim, spec.dim()));
  }
  const auto mix = diffuse(spec, sched, t);
  double pdf = 0.0;
  for (int k = 0; k < spec.components(); ++k) {
    const double v = mix.variances[k];
    const double z = u - mix.alpha * spec.means(k, dim);
    pdf += spec.weights[k] * std::exp(-0.5 * z * z / v) / std::sqrt(2.0 * std::numbers::pi * v);
  }
  return pdf;
}

double mog_marginal_cdf(const MogSpec& spec, const NoiseSchedule& sched, double u, double t, int dim) {
  if (dim < 0 || dim >= spec.dim()) {
    throw ParameterError(fmt::format("marginal dimension {} out of range [0, {})", dim, spec.dim()));
  }
  const auto mix = diffuse(spec, sched, t);
  double cdf = 0.0;
  for (int k = 0; k < spec.components(); ++k) {
    const double z = (u - mix.alpha * spec.means(k, dim)) / std::sqrt(mix.variances[k]);
    cdf += spec.weights[k] * 0.5 * std::erfc(-z / std::numbers::sqrt2);
  }
  return cdf;
}

Matrix mog_sample(const MogSpec& spec, Eigen::Index n, Seed seed) {
  spec.validate();
  Matrix out(n, spec.dim());
  for (Eigen::Index i = 0; i < n; ++i) {
    Rng rng(seed.child(static_cast<std::uint64_t>(i)));
    const double u = rng.uniform();
    int k = 0;
    double acc = spec.weights[0];
    while (u >= acc && k + 1 < spec.components()) acc += spec.weights[++k];
    const double sd = std::sqrt(spec.variances[k]);
    for (int j = 0; j < spec.dim(); ++j) out(i, j) = spec.means(k, j) + sd * rng.normal();
  }
  return out;
}

}  // namespace collapse
