#include <cmath>

#include <gtest/gtest.h>

#include "collapse/error.hpp"
#include "collapse/schedule.hpp"

using namespace collapse;

TEST(Schedule, VpEndpoints) {
  const auto vp = NoiseSchedule::vp();
  const auto c0 = vp.coeffs(0.0);
  EXPECT_EQ(c0.alpha, 1.0);
  EXPECT_EQ(c0.sigma, 0.0);
  EXPECT_NEAR(vp.alpha(1.0), std::exp(-5.025), 1e-9);
  EXPECT_NEAR(vp.alpha(1.0), 6.56e-3, 2e-5);
}

TEST(Schedule, LinearCoefficients) {
  const auto lin = NoiseSchedule::linear();
  const auto c = lin.coeffs(0.25);
  EXPECT_DOUBLE_EQ(c.alpha, 0.75);
  EXPECT_DOUBLE_EQ(c.sigma, 0.25);
}

TEST(Schedule, SubVpSigma) {
  const auto s = NoiseSchedule::sub_vp();
  for (double t : {0.1, 0.5, 0.9}) {
    const double b = 0.1 * t + 0.5 * t * t * 19.9;
    EXPECT_NEAR(s.sigma(t), 1.0 - std::exp(-b), 1e-14);
    EXPECT_NEAR(s.alpha(t), std::exp(-0.5 * b), 1e-14);
  }
}

TEST(Schedule, TimeOutOfRange) {
  const auto vp = NoiseSchedule::vp();
  EXPECT_THROW((void)vp.coeffs(-0.01), ParameterError);
  EXPECT_THROW((void)vp.coeffs(1.01), ParameterError);
}

TEST(Schedule, VpUnitNormOnGrid) {
  const auto vp = NoiseSchedule::vp();
  double prev_a = 2.0, prev_s = -1.0;
  for (int k = 0; k < 1000; ++k) {
    const double t = k / 999.0;
    const auto c = vp.coeffs(t);
    EXPECT_NEAR(c.alpha * c.alpha + c.sigma * c.sigma, 1.0, 1e-12);
    EXPECT_LT(c.alpha, prev_a);
    EXPECT_GT(c.sigma, prev_s);
    prev_a = c.alpha;
    prev_s = c.sigma;
  }
}

TEST(Schedule, VpDriftDiffusionAtZero) {
  const auto vp = NoiseSchedule::vp();
  Vector x(3);
  x << 1.0, -2.0, 0.5;
  const auto dd = vp.drift_diffusion(x, 0.0);
  EXPECT_TRUE(dd.drift.isApprox(-0.05 * x, 1e-14));
  EXPECT_NEAR(dd.diffusion, std::sqrt(0.1), 1e-12);
  const auto zero = vp.drift_diffusion(Vector::Zero(3), 0.7);
  EXPECT_EQ(zero.drift, Vector::Zero(3));
}

TEST(Schedule, VpDiffusionEqualsBeta) {
  const auto vp = NoiseSchedule::vp();
  for (int k = 0; k <= 100; ++k) {
    const double t = k / 100.0;
    EXPECT_NEAR(vp.diffusion_sq(t) - vp.beta(t), 0.0, 1e-10) << t;
  }
}

// g^2 = d(sigma^2)/dt - 2 (d log alpha/dt) sigma^2, with both derivatives from
// central differences of the coefficient curves.
TEST(Schedule, DiffusionMatchesFiniteDifferences) {
  for (const auto& sched : {NoiseSchedule::vp(), NoiseSchedule::sub_vp(), NoiseSchedule::linear()}) {
    for (double t : {0.05, 0.2, 0.5, 0.8, 0.95}) {
      const double h = 1e-6;
      const auto p = sched.coeffs(t + h);
      const auto m = sched.coeffs(t - h);
      const auto c = sched.coeffs(t);
      const double dsig2 = (p.sigma * p.sigma - m.sigma * m.sigma) / (2 * h);
      const double dloga = (std::log(p.alpha) - std::log(m.alpha)) / (2 * h);
      const double g2 = dsig2 - 2 * dloga * c.sigma * c.sigma;
      EXPECT_NEAR(sched.diffusion_sq(t) / g2, 1.0, 1e-5) << sched.name() << " t=" << t;
      EXPECT_NEAR(sched.log_alpha_rate(t) / dloga, 1.0, 1e-5) << sched.name() << " t=" << t;
    }
  }
}

TEST(Schedule, LinearSingularAtOne) {
  const auto lin = NoiseSchedule::linear();
  EXPECT_THROW(lin.drift_diffusion(Vector::Ones(2), 1.0), SingularityError);
  EXPECT_LT(lin.max_time(), 1.0);
  EXPECT_NO_THROW((void)lin.diffusion_sq(lin.max_time()));
}

TEST(Schedule, LogSnrInverse) {
  const auto vp = NoiseSchedule::vp();
  for (double t : {0.01, 0.3, 0.7, 0.99}) {
    EXPECT_NEAR(vp.time_for_log_snr(vp.log_snr(t), 1e-4, 1.0), t, 1e-10);
  }
}

TEST(Perturb, ZeroNoiseAtZero) {
  const auto vp = NoiseSchedule::vp();
  Vector x0(4);
  x0 << 1, 2, 3, 4;
  const auto p = perturb(vp, x0, 0.0, Seed{1});
  EXPECT_EQ(p.x_t, x0);
}

TEST(Perturb, MomentsAtOne) {
  const auto vp = NoiseSchedule::vp();
  Vector x0(2);
  x0 << 1.0, -1.0;
  const int n = 100000;
  Vector sum = Vector::Zero(2), sq = Vector::Zero(2);
  for (int i = 0; i < n; ++i) {
    const auto p = perturb(vp, x0, 1.0, Seed{7}.child(i));
    sum += p.x_t;
    sq += p.x_t.cwiseProduct(p.x_t);
  }
  const Vector mean = sum / n;
  const Vector var = sq / n - mean.cwiseProduct(mean);
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(mean[j], vp.alpha(1.0) * x0[j], 0.02);
    EXPECT_NEAR(var[j], 1.0, 0.02);
  }
}

TEST(Perturb, Deterministic) {
  const auto vp = NoiseSchedule::vp();
  const Vector x0 = Vector::Ones(5);
  const auto a = perturb(vp, x0, 0.4, Seed{3});
  const auto b = perturb(vp, x0, 0.4, Seed{3});
  EXPECT_EQ(a.x_t, b.x_t);
  EXPECT_EQ(a.eps, b.eps);
  EXPECT_TRUE(a.x_t.isApprox(vp.alpha(0.4) * x0 + vp.sigma(0.4) * a.eps));
}
