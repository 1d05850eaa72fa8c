#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "collapse/dataset.hpp"
#include "collapse/error.hpp"
#include "collapse/mog.hpp"
#include "collapse/rng.hpp"

using namespace collapse;

namespace {

// Independent log density: direct sum of Gaussian densities in long double.
long double brute_log_density(const MogSpec& spec, const NoiseSchedule& sched, const Vector& x, double t) {
  const auto [alpha, sigma] = sched.coeffs(t);
  long double total = 0;
  for (int k = 0; k < spec.components(); ++k) {
    const long double var = spec.variances[k] * alpha * alpha + sigma * sigma;
    long double sq = 0;
    for (int j = 0; j < spec.dim(); ++j) {
      const long double diff = x[j] - alpha * spec.means(k, j);
      sq += diff * diff;
    }
    total += spec.weights[k] * std::exp(-0.5L * sq / var) / std::pow(2 * std::numbers::pi_v<long double> * var,
                                                                      0.5L * spec.dim());
  }
  return std::log(total);
}

Vector fd_score(const MogSpec& spec, const NoiseSchedule& sched, const Vector& x, double t, double h) {
  Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vector xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = static_cast<double>((brute_log_density(spec, sched, xp, t) - brute_log_density(spec, sched, xm, t)) /
                               (2 * h));
  }
  return g;
}

}  // namespace

TEST(MogScore, SymmetricZeroAtOrigin) {
  const auto spec = MogSpec::symmetric_pair(1, 0.2);
  const auto vp = NoiseSchedule::vp();
  for (double t : {0.0, 0.1, 0.5, 1.0}) EXPECT_NEAR(mog_score(spec, vp, Vector(Vector::Zero(1)), t)[0], 0.0, 1e-15);
}

TEST(MogScore, SingleComponentIsGaussianScore) {
  MogSpec spec;
  spec.weights = {1.0};
  spec.means = Matrix(1, 3);
  spec.means << 0.5, -1.0, 2.0;
  spec.variances = {0.3};
  const auto vp = NoiseSchedule::vp();
  Vector x(3);
  x << 0.1, 0.2, -0.3;
  for (double t : {0.0, 0.3, 0.9}) {
    const auto [a, s] = vp.coeffs(t);
    const Vector expected = -(x - a * spec.means.row(0).transpose()) / (0.3 * a * a + s * s);
    EXPECT_TRUE(mog_score(spec, vp, x, t).isApprox(expected, 1e-14));
  }
}

TEST(MogScore, MatchesFiniteDifferences10D) {
  const auto spec = *mog_spec_for(MogNDSpec{});
  const auto vp = NoiseSchedule::vp();
  Rng rng(Seed{21});
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = rng.normal_vector(10) * 1.2;
    const Vector s = mog_score(spec, vp, x, 0.5);
    const Vector fd = fd_score(spec, vp, x, 0.5, 1e-5);
    EXPECT_LT((s - fd).norm() / s.norm(), 1e-6);
  }
}

TEST(MogScore, OddSymmetry) {
  const auto spec = *mog_spec_for(MogNDSpec{});
  const auto vp = NoiseSchedule::vp();
  Rng rng(Seed{2});
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = rng.normal_vector(10);
    const double t = rng.uniform();
    EXPECT_LT((mog_score(spec, vp, Vector(-x), t) + mog_score(spec, vp, x, t)).norm(), 1e-12);
  }
}

TEST(MogScore, NearIdentityAtOne) {
  const auto spec = *mog_spec_for(MogNDSpec{});
  const auto vp = NoiseSchedule::vp();
  Rng rng(Seed{4});
  for (int trial = 0; trial < 50; ++trial) {
    Vector x = rng.normal_vector(10);
    x *= 3.0 * rng.uniform() / x.norm();
    EXPECT_LT((mog_score(spec, vp, x, 1.0) + x).norm(), 5e-2);
  }
}

TEST(MogScore, FarModesDoNotUnderflow) {
  MogSpec spec;
  spec.weights = {0.5, 0.5};
  spec.means = Matrix(2, 1);
  spec.means << -50.0, 50.0;
  spec.variances = {0.01, 0.01};
  const auto vp = NoiseSchedule::vp();
  Vector x(1);
  x << 10.0;
  const Vector s = mog_score(spec, vp, x, 0.0);
  EXPECT_TRUE(std::isfinite(s[0]));
  EXPECT_NEAR(s[0], -(10.0 - 50.0) / 0.01, 1e-9);
}

TEST(MogScore, BatchMatchesPointwise) {
  const auto spec = *mog_spec_for(Mog2DSpec{});
  const auto vp = NoiseSchedule::vp();
  Rng rng(Seed{5});
  const Matrix x = rng.normal_matrix(20, 2);
  const Matrix batch = mog_score(spec, vp, x, 0.3);
  for (Eigen::Index i = 0; i < 20; ++i) {
    const Vector xi = x.row(i).transpose();
    EXPECT_TRUE(batch.row(i).transpose().isApprox(mog_score(spec, vp, xi, 0.3), 1e-14));
  }
}

TEST(MogVelocity, SymmetricOriginAndDriftOnly) {
  const auto spec = MogSpec::symmetric_pair(1, 0.2);
  const auto vp = NoiseSchedule::vp();
  EXPECT_NEAR(mog_velocity(spec, vp, Vector(Vector::Zero(1)), 0.5)[0], 0.0, 1e-15);
  Vector x(2);
  x << 0.4, -1.3;
  const auto pair = MogSpec::symmetric_pair(2, 0.2);
  const Vector v = mog_velocity(pair, vp, x, 0.6);
  const Vector expected = -0.5 * vp.beta(0.6) * x - 0.5 * vp.beta(0.6) * mog_score(pair, vp, x, 0.6);
  EXPECT_TRUE(v.isApprox(expected, 1e-13));
}

// Single Gaussian N(mu, s2): along the probability-flow ODE the standardised
// coordinate (x - alpha mu) / sqrt(s2 alpha^2 + sigma^2) is conserved.
TEST(MogVelocity, GaussianFlowEndpoint) {
  MogSpec spec;
  spec.weights = {1.0};
  spec.means = Matrix::Constant(1, 1, 0.7);
  spec.variances = {0.3};
  const auto vp = NoiseSchedule::vp();
  const double t_min = 1e-3;
  const auto grid = time_grid(1000, t_min, 1.0);
  for (double x1 : {-1.5, 0.0, 0.8}) {
    Vector x = Vector::Constant(1, x1);
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      x -= (grid[k] - grid[k + 1]) * mog_velocity(spec, vp, x, grid[k]);
    }
    auto standard = [&](double t, double v) {
      const auto [a, s] = vp.coeffs(t);
      return (v - a * 0.7) / std::sqrt(0.3 * a * a + s * s);
    };
    const auto [a0, s0] = vp.coeffs(t_min);
    const double expected = a0 * 0.7 + standard(1.0, x1) * std::sqrt(0.3 * a0 * a0 + s0 * s0);
    EXPECT_NEAR(x[0], expected, 1e-3);
  }
}

TEST(MogMarginal, HandEvaluatedDensityAtZero) {
  const auto spec = MogSpec::symmetric_pair(3, 0.2);
  const auto vp = NoiseSchedule::vp();
  const double t = 0.4;
  const auto [a, s] = vp.coeffs(t);
  const double var = 0.2 * a * a + s * s;
  const double expected = std::exp(-0.5 * a * a / var) / std::sqrt(2 * std::numbers::pi * var);
  EXPECT_NEAR(mog_marginal_pdf(spec, vp, 0.0, t, 1), expected, 1e-14);
}

TEST(MogMarginal, IntegratesToOne) {
  const auto spec = *mog_spec_for(Mog2DSpec{});
  const auto vp = NoiseSchedule::vp();
  for (double t : {0.0, 0.05, 0.5}) {
    const int n = 20000;
    const double h = 20.0 / n;
    double total = 0;
    for (int i = 0; i <= n; ++i) {
      const double w = (i == 0 || i == n) ? 0.5 : 1.0;
      total += w * mog_marginal_pdf(spec, vp, -10.0 + i * h, t, 0);
    }
    EXPECT_NEAR(total * h, 1.0, 1e-6) << t;
  }
}

TEST(MogMarginal, StandardNormalAtOne) {
  const auto spec = MogSpec::symmetric_pair(1, 0.2);
  const auto vp = NoiseSchedule::vp();
  for (double u = -4; u <= 4; u += 0.25) {
    EXPECT_NEAR(mog_marginal_pdf(spec, vp, u, 1.0, 0), std::exp(-0.5 * u * u) / std::sqrt(2 * std::numbers::pi),
                1e-3);
  }
}

TEST(MogMarginal, CdfMatchesIntegratedPdf) {
  const auto spec = MogSpec::symmetric_pair(1, 0.2);
  const auto vp = NoiseSchedule::vp();
  const int n = 40000;
  const double lo = -8.0, h = 9.3 / n;
  double acc = 0;
  for (int i = 0; i < n; ++i) acc += h * mog_marginal_pdf(spec, vp, lo + (i + 0.5) * h, 0.2, 0);
  EXPECT_NEAR(mog_marginal_cdf(spec, vp, lo + 9.3, 0.2, 0), acc, 1e-7);
}

TEST(MogMarginal, DimOutOfRange) {
  const auto spec = MogSpec::symmetric_pair(2, 0.2);
  EXPECT_THROW(mog_marginal_pdf(spec, NoiseSchedule::vp(), 0.0, 0.5, 2), ParameterError);
}

TEST(MogSpecValidation, RejectsBadWeights) {
  MogSpec spec = MogSpec::symmetric_pair(2, 0.2);
  spec.weights = {0.6, 0.6};
  EXPECT_THROW(spec.validate(), ParameterError);
  spec.weights = {0.5, 0.5};
  spec.variances = {0.2, 0.0};
  EXPECT_THROW(spec.validate(), ParameterError);
}

TEST(MogSample, Moments) {
  const auto spec = MogSpec::symmetric_pair(2, 0.2);
  const Matrix x = mog_sample(spec, 40000, Seed{3});
  EXPECT_NEAR(x.col(0).mean(), 0.0, 0.02);
  EXPECT_NEAR(x.col(1).array().square().mean(), 1.2, 0.03);
  // Both coordinates of a row share one component.
  const double same_sign = ((x.col(0).array() * x.col(1).array()) > 0).cast<double>().mean();
  EXPECT_GT(same_sign, 0.95);
}
