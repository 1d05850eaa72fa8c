#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "collapse/error.hpp"
#include "collapse/seesaw.hpp"

using namespace collapse;
using namespace collapse::seesaw;

namespace {

// Independent reference: composite Simpson on [-12, 12] of f(x) He_i(x) phi(x),
// with He_i from the explicit monomial formulas divided by sqrt(i!).
double he_explicit(int i, double x) {
  switch (i) {
    case 0: return 1.0;
    case 1: return x;
    case 2: return (x * x - 1) / std::sqrt(2.0);
    case 3: return (x * x * x - 3 * x) / std::sqrt(6.0);
    case 4: return (std::pow(x, 4) - 6 * x * x + 3) / std::sqrt(24.0);
    case 5: return (std::pow(x, 5) - 10 * std::pow(x, 3) + 15 * x) / std::sqrt(120.0);
    default: return std::nan("");
  }
}

template <class F>
double simpson(F f) {
  const int n = 24000;
  const double a = -12, b = 12, h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * f(a + i * h);
  return s * h / 3;
}

double phi(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi); }

}  // namespace

TEST(Hermite, Examples) {
  EXPECT_EQ(hermite_eval(0, 0.37), 1.0);
  EXPECT_NEAR(hermite_eval(2, 0.0), -1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(hermite_eval(3, 1.0), -2 / std::sqrt(6.0), 1e-15);
  for (int i = 0; i <= 5; ++i)
    for (double x : {-2.3, -0.4, 0.0, 1.1, 3.0}) EXPECT_NEAR(hermite_eval(i, x), he_explicit(i, x), 1e-12);
}

TEST(Hermite, Orthonormality) {
  const auto& rule = default_rule();
  for (int i = 0; i <= 10; ++i) {
    for (int j = 0; j <= 10; ++j) {
      double acc = 0;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k)
        acc += rule.weights[k] * hermite_eval(i, rule.nodes[k]) * hermite_eval(j, rule.nodes[k]);
      EXPECT_NEAR(acc, i == j ? 1.0 : 0.0, 1e-8) << i << "," << j;
    }
  }
}

TEST(Quadrature, WeightsSumToOne) {
  const auto rule = gauss_hermite(40);
  double s = 0;
  for (double w : rule.weights) s += w;
  EXPECT_NEAR(s, 1.0, 1e-13);
}

TEST(TargetCoeffs, LargeTimeIsMinusIdentity) {
  const auto c = target_coeffs(60.0, 6);
  EXPECT_NEAR(c[0], -1.0, 1e-12);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_NEAR(c[i], 0.0, 1e-12);
}

TEST(TargetCoeffs, EvenVanishOddNonzero) {
  const auto c = target_coeffs(0.0, 40);
  for (int i = 1; i <= 40; ++i) {
    if (i % 2 == 0) EXPECT_LT(std::abs(c[i - 1]), 1e-12) << i;
    else EXPECT_GT(std::abs(c[i - 1]), 1e-6) << i;
  }
  EXPECT_LT(c[0], 0.0);
  EXPECT_LT(c[2], 0.0);
}

TEST(TargetCoeffs, MatchSimpsonReference) {
  const auto c = target_coeffs(0.0, 5);
  for (int i = 1; i <= 5; ++i) {
    const double ref = simpson([i](double x) { return (std::tanh(x) - x) * he_explicit(i, x) * phi(x); });
    EXPECT_NEAR(c[i - 1], ref, 1e-9) << i;
  }
}

TEST(TargetCoeffs, InsufficientNodes) {
  const auto rule = gauss_hermite(20);
  EXPECT_THROW(target_coeffs(0.0, 6, rule), ConfigError);
}

TEST(TargetCoeffs, ParsevalResidual) {
  const auto c = target_coeffs(0.0, kMaxDegree);
  double partial = 0;
  for (double a : c) partial += a * a;
  const double total = simpson([](double x) { return std::pow(std::tanh(x) - x, 2) * phi(x); });
  EXPECT_LE(partial, total + 1e-12);
  EXPECT_LT(total - partial, 1e-6);
}

TEST(OptimalTheta, Structure) {
  const auto a = target_coeffs(0.0, 6);
  const auto th = optimal_theta(6);
  ASSERT_EQ(th.coeffs.size(), 6u);
  EXPECT_EQ(th.t_coeff, 0.0);
  EXPECT_NEAR(th.coeffs[0], (a[0] - 1) / 2, 1e-15);
  for (int i = 2; i <= 6; i += 2) EXPECT_LT(std::abs(th.coeffs[i - 1]), 1e-12);
  EXPECT_EQ(optimal_theta(1).coeffs.size(), 1u);
}

TEST(SeesawLosses, ClosedFormAtOne) {
  const auto a = target_coeffs(0.0, kMaxDegree);
  const auto l = seesaw_losses(1);
  EXPECT_NEAR(l.high_noise, 0.25 * (1 + a[0]) * (1 + a[0]), 1e-14);
  double tail = 0;
  for (std::size_t i = 1; i < a.size(); ++i) tail += a[i] * a[i];
  EXPECT_NEAR(l.low_noise, 0.25 * (1 + a[0]) * (1 + a[0]) + tail, 1e-14);
}

// Direct check: the losses are the L2(phi) errors of f_theta* against each target.
TEST(SeesawLosses, AgreeWithDirectIntegration) {
  for (int p : {1, 3, 5}) {
    const auto th = optimal_theta(p);
    auto f = [&](double x) {
      double v = 0;
      for (int i = 1; i <= p; ++i) v += th.coeffs[i - 1] * hermite_eval(i, x);
      return v;
    };
    const double l1 = simpson([&](double x) { return std::pow(f(x) - (std::tanh(x) - x), 2) * phi(x); });
    const double l2 = simpson([&](double x) { return std::pow(f(x) + x, 2) * phi(x); });
    const auto l = seesaw_losses(p);
    // l1 drops the Hermite tail beyond kMaxDegree (about 1e-8 here).
    EXPECT_NEAR(l.low_noise, l1, 1e-7) << p;
    EXPECT_NEAR(l.high_noise, l2, 1e-7) << p;
  }
}

TEST(SeesawLosses, Monotone) {
  for (int p = 1; p < 20; ++p) {
    const auto a = seesaw_losses(p);
    const auto b = seesaw_losses(p + 1);
    EXPECT_LE(b.low_noise, a.low_noise) << p;
    EXPECT_GE(b.high_noise, a.high_noise) << p;
    if ((p + 1) % 2 == 1) {
      EXPECT_LT(b.low_noise, a.low_noise) << p;
      EXPECT_GT(b.high_noise, a.high_noise) << p;
    }
  }
}

TEST(SeesawLosses, RangeChecked) {
  EXPECT_THROW(seesaw_losses(0), ParameterError);
  EXPECT_THROW(seesaw_losses(kMaxDegree + 1), ParameterError);
}
