#include <cmath>
#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include "collapse/diagnostics.hpp"
#include "collapse/error.hpp"
#include "collapse/mog.hpp"

using namespace collapse;

namespace {

const NoiseSchedule kVp = NoiseSchedule::vp();

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Total variation between a normalized histogram row and the exact bin masses
// of a CDF, with the CDF renormalized to the histogram range.
double histogram_tv(const DensityHistogram& h, Eigen::Index row, const std::function<double(double)>& cdf) {
  const double w = h.bin_width();
  const double lo = h.bin_centers.front() - w / 2;
  const double hi = h.bin_centers.back() + w / 2;
  const double mass = cdf(hi) - cdf(lo);
  double tv = 0;
  for (std::size_t b = 0; b < h.bin_centers.size(); ++b) {
    const double c = h.bin_centers[b];
    const double p = (cdf(c + w / 2) - cdf(c - w / 2)) / mass;
    tv += std::abs(h.density(row, static_cast<Eigen::Index>(b)) * w - p);
  }
  return tv / 2;
}

}  // namespace

TEST(VelocityMae, OracleAgainstItselfIsZero) {
  const auto src = ScoreSource::oracle(MogSpec::symmetric_pair(10, 0.2), kVp);
  for (double t : {0.1, 0.5, 1.0}) EXPECT_EQ(velocity_mae(src, src, t, 500, Seed{1}), 0.0);
}

TEST(VelocityMae, ZeroScoreModel) {
  const auto spec = MogSpec::symmetric_pair(3, 0.2);
  const auto oracle = ScoreSource::oracle(spec, kVp);
  const auto zero = ScoreSource::zero(kVp, 3);
  const double t = 0.6;
  const Eigen::Index n = 400;
  const Seed seed{4};

  // Rebuild the test points and average |g^2/2 score| by hand.
  const auto [alpha, sigma] = kVp.coeffs(t);
  const Matrix x0 = mog_sample(spec, n, seed.child(0));
  Rng rng(seed.child(1));
  const Matrix noise = rng.normal_matrix(n, 3);
  const double half_g2 = 0.5 * kVp.beta(t);
  double total = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector x = (alpha * x0.row(i) + sigma * noise.row(i)).transpose();
    total += (half_g2 * mog_score(spec, kVp, x, t)).cwiseAbs().sum();
  }
  EXPECT_NEAR(velocity_mae(zero, oracle, t, n, seed), total / (3.0 * n), 1e-12);
}

TEST(VelocityMae, RequiresMixtureReference) {
  const auto zero = ScoreSource::zero(kVp, 2);
  EXPECT_THROW(velocity_mae(zero, zero, 0.5, 10, Seed{1}), ParameterError);
  const auto oracle = ScoreSource::oracle(MogSpec::symmetric_pair(3, 0.2), kVp);
  EXPECT_THROW(velocity_mae(zero, oracle, 0.5, 10, Seed{1}), ParameterError);
}

TEST(VelocityGrid, OddForSymmetricMixture) {
  const auto src = ScoreSource::oracle(MogSpec::symmetric_pair(1, 0.2), kVp);
  const auto g = velocity_grid(src, 0, {-3, 3}, {0.05, 1.0}, 41, 7, Seed{1});
  for (Eigen::Index i = 0; i < g.values.rows(); ++i)
    for (Eigen::Index j = 0; j < 41; ++j) EXPECT_NEAR(g.values(i, j), -g.values(i, 40 - j), 1e-10);
}

TEST(VelocityGrid, ZeroScoreIsLinearDrift) {
  const auto src = ScoreSource::zero(kVp, 2);
  const auto g = velocity_grid(src, 1, {-2, 2}, {0.1, 0.9}, 5, 4, Seed{3});
  for (std::size_t i = 0; i < g.ts.size(); ++i)
    for (std::size_t j = 0; j < g.xs.size(); ++j)
      EXPECT_DOUBLE_EQ(g.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)),
                       -0.5 * kVp.beta(g.ts[i]) * g.xs[j]);
}

TEST(VelocityGrid, TwoByTwoMatchesPointwise) {
  const auto spec = MogSpec::symmetric_pair(3, 0.2);
  const auto src = ScoreSource::oracle(spec, kVp);
  const auto g = velocity_grid(src, 2, {-1, 1}, {0.2, 0.8}, 2, 2, Seed{5});
  ASSERT_EQ(g.values.size(), 4);
  Rng rng(Seed{5});
  Vector x = rng.normal_vector(3);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      x[2] = g.xs[static_cast<std::size_t>(j)];
      EXPECT_DOUBLE_EQ(g.values(i, j), mog_velocity(spec, kVp, x, g.ts[static_cast<std::size_t>(i)])[2]);
    }
  }
  EXPECT_THROW(velocity_grid(src, 3, {-1, 1}, {0.2, 0.8}, 2, 2, Seed{5}), ParameterError);
  EXPECT_THROW(velocity_grid(src, 0, {-1, 1}, {0.2, 0.8}, 1, 2, Seed{5}), ParameterError);
}

TEST(ErrorCovariance, OracleIsZero) {
  const auto src = ScoreSource::oracle(MogSpec::symmetric_pair(10, 0.2), kVp);
  for (auto kind : {SamplerKind::ODE, SamplerKind::SDE}) {
    const auto c = error_covariance(src, src, 50, 100, kind, Seed{2});
    ASSERT_EQ(c.size(), 51u);
    for (const auto& p : c) EXPECT_LE(std::abs(p.c), 1e-12);
  }
}

TEST(ErrorCovariance, StartValueIsVariance) {
  const auto spec = MogSpec::symmetric_pair(2, 0.2);
  const auto oracle = ScoreSource::oracle(spec, kVp);
  // A perturbed field: 0.8 times the exact noise prediction.
  const auto model = ScoreSource::from_eps(
      [&](const Matrix& x, double t) { return Matrix(0.8 * oracle.eps(x, t)); }, kVp, 2);
  const auto c = error_covariance(model, oracle, 20, 200, SamplerKind::ODE, Seed{3});
  EXPECT_DOUBLE_EQ(c.front().t, 1.0);
  EXPECT_GT(c.front().c, 0.0);
  EXPECT_THROW(error_covariance(model, oracle, 20, 10, SamplerKind::DDIM, Seed{3}), ParameterError);
}

TEST(ErrorCovariance, DeterministicGivenSeed) {
  const auto oracle = ScoreSource::oracle(MogSpec::symmetric_pair(2, 0.2), kVp);
  const auto model = ScoreSource::from_eps(
      [&](const Matrix& x, double t) { return Matrix(0.9 * oracle.eps(x, t)); }, kVp, 2);
  const auto a = error_covariance(model, oracle, 20, 50, SamplerKind::SDE, Seed{6});
  const auto b = error_covariance(model, oracle, 20, 50, SamplerKind::SDE, Seed{6});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].c, b[k].c);
}

TEST(DensityEvolution, RowsNormalized) {
  const auto src = ScoreSource::oracle(MogSpec::symmetric_pair(1, 0.2), kVp);
  SamplerConfig cfg = SamplerConfig::defaults(SamplerKind::ODE);
  const auto r = run_sampler(src, cfg, 2000, Seed{1}, 10);
  const auto h = density_evolution(*r.trajectory, 0, 40, {-3, 3});
  ASSERT_EQ(h.density.rows(), static_cast<Eigen::Index>(r.trajectory->times.size()));
  for (Eigen::Index k = 0; k < h.density.rows(); ++k) EXPECT_NEAR(h.density.row(k).sum() * h.bin_width(), 1.0, 1e-9);
}

TEST(DensityEvolution, MatchesAnalyticMarginals) {
  const auto spec = MogSpec::symmetric_pair(1, 0.2);
  const auto src = ScoreSource::oracle(spec, kVp);
  auto cfg = SamplerConfig::defaults(SamplerKind::ODE);
  cfg.steps = 500;
  const auto r = run_sampler(src, cfg, 50000, Seed{11}, 500);
  const auto h = density_evolution(*r.trajectory, 0, 100, {-3, 3});
  const double t_last = h.times.back();
  EXPECT_LT(histogram_tv(h, 0, normal_cdf), 0.05);
  EXPECT_LT(histogram_tv(h, h.density.rows() - 1,
                         [&](double u) { return mog_marginal_cdf(spec, kVp, u, t_last, 0); }),
            0.05);
}

TEST(DensityEvolution, InvalidInputs) {
  EXPECT_THROW(density_evolution(Trajectory{}, 0, 10, {-1, 1}), ParameterError);
  Trajectory traj;
  traj.times = {1.0};
  traj.states = {Matrix::Zero(3, 2)};
  EXPECT_THROW(density_evolution(traj, 2, 10, {-1, 1}), ParameterError);
  EXPECT_THROW(density_evolution(traj, 0, 0, {-1, 1}), ParameterError);
  EXPECT_THROW(density_evolution(traj, 0, 10, {1, -1}), ParameterError);
}

TEST(DiagnosticsCsv, Headers) {
  const std::string dir = testing::TempDir();
  auto first_line = [](const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    return line;
  };
  write_covariance_csv({{1.0, 0.5}, {0.5, 0.1}}, dir + "/c.csv");
  EXPECT_EQ(first_line(dir + "/c.csv"), "t,c");
  const auto g = velocity_grid(ScoreSource::zero(kVp, 1), 0, {-1, 1}, {0.1, 0.9}, 2, 2, Seed{1});
  g.write_csv(dir + "/g.csv");
  EXPECT_EQ(first_line(dir + "/g.csv"), "x,t,v");
  Trajectory traj;
  traj.times = {1.0};
  traj.states = {Matrix::Zero(3, 1)};
  density_evolution(traj, 0, 4, {-1, 1}).write_csv(dir + "/d.csv");
  EXPECT_EQ(first_line(dir + "/d.csv"), "t,bin_center,density");
}
