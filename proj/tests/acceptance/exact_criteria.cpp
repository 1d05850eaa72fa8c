// Criteria 1-6: closed forms, oracle agreement and metric unit behaviour.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include <fmt/format.h>

#include "../common/oracles.hpp"
#include "collapse/mog.hpp"
#include "collapse/samplers.hpp"
#include "collapse/schedule.hpp"
#include "collapse/score_model.hpp"
#include "collapse/score_source.hpp"
#include "collapse/seesaw.hpp"
#include "collapse/tid.hpp"
#include "harness.hpp"

namespace acceptance {

namespace {

using namespace collapse;

Outcome schedule_exactness(const Context&) {
  const auto vp = NoiseSchedule::vp();
  // beta_min = 0.1, beta_max = 20: int_0^1 beta = 10.05.
  const double alpha1_ref = std::exp(-0.5 * (0.1 + 0.5 * (20.0 - 0.1)));
  const double alpha1_err = std::abs(vp.alpha(1.0) - alpha1_ref);
  double unit_err = 0;
  for (int i = 0; i < 1000; ++i) {
    const double t = i / 999.0;
    const auto [a, s] = vp.coeffs(t);
    unit_err = std::max(unit_err, std::abs(a * a + s * s - 1.0));
  }
  Outcome out;
  const bool endpoints = vp.alpha(0.0) == 1.0 && vp.sigma(0.0) == 0.0;
  out.pass = endpoints && alpha1_err < 1e-9 && unit_err < 1e-12;
  out.summary = fmt::format("alpha_0 = {}, sigma_0 = {}, |alpha_1 - exp(-5.025)| = {:.1e}, max |alpha^2 + sigma^2 - 1| = {:.1e}",
                            vp.alpha(0.0), vp.sigma(0.0), alpha1_err, unit_err);
  return out;
}

Outcome score_oracle(const Context&) {
  const auto vp = NoiseSchedule::vp();
  Rng rng(Seed{2024});
  double worst = 0;
  for (int dim : {1, 10}) {
    const auto spec = MogSpec::symmetric_pair(dim, 0.2);
    for (int k = 0; k < 100; ++k) {
      const double t = rng.uniform(0.01, 1.0);
      const Vector x = 1.5 * rng.normal_vector(dim);
      const Vector fd = oracle::fd_score(spec, vp, x, t);
      const Vector s = mog_score(spec, vp, x, t);
      worst = std::max(worst, (s - fd).norm() / std::max(fd.norm(), 1e-8));
    }
  }
  Outcome out;
  out.pass = worst < 1e-6;
  out.summary = fmt::format("max relative error {:.2e} over 200 (x, t) pairs", worst);
  return out;
}

Outcome sampler_fidelity(const Context&) {
  const auto vp = NoiseSchedule::vp();
  const auto spec = MogSpec::symmetric_pair(1, 0.2);
  const auto src = ScoreSource::oracle(spec, vp);
  auto cdf = [&](double u) { return mog_marginal_cdf(spec, vp, u, 0.0, 0); };
  auto column = [](const Matrix& m) { return std::vector<double>(m.data(), m.data() + m.rows()); };

  SamplerConfig ode = SamplerConfig::defaults(SamplerKind::ODE);
  ode.steps = 500;
  const SamplerConfig sde = SamplerConfig::defaults(SamplerKind::SDE);
  const double ks_ode = oracle::ks_distance(column(run_sampler(src, ode, 50000, Seed{301}).samples.points), cdf);
  const double ks_sde = oracle::ks_distance(column(run_sampler(src, sde, 50000, Seed{302}).samples.points), cdf);

  SamplerConfig euler = SamplerConfig::defaults(SamplerKind::ODE);
  euler.steps = 1000;
  SamplerConfig ddim = SamplerConfig::defaults(SamplerKind::DDIM);
  ddim.steps = 1000;
  const Matrix a = run_sampler(src, euler, 50000, Seed{303}).samples.points;
  const Matrix b = run_sampler(src, ddim, 50000, Seed{303}).samples.points;
  const double gap = (a - b).cwiseAbs().mean();

  Outcome out;
  out.pass = ks_ode < 0.02 && ks_sde < 0.02 && gap < 0.02;
  out.summary = fmt::format("KS ode(500) = {:.4f}, KS sde(1000) = {:.4f}, mean |ddim - ode| = {:.4f}", ks_ode, ks_sde,
                            gap);
  return out;
}

Outcome gradient_correctness(const Context&) {
  Rng rng(Seed{404});
  const int n = 16, d = 2;
  const Matrix x0 = rng.normal_matrix(n, d);
  const Matrix eps = rng.normal_matrix(n, d);
  Vector t(n);
  for (int i = 0; i < n; ++i) t[i] = rng.uniform(0.05, 1.0);

  Outcome out;
  out.pass = true;
  double worst = 0;
  long checked = 0;
  long skipped = 0;
  for (int layers : {1, 2, 3}) {
    for (auto act : {Activation::Tanh, Activation::ReLU}) {
      for (auto skip : {SkipMode::None, SkipMode::Learned, SkipMode::Fixed}) {
        ModelArch arch;
        arch.hidden.assign(static_cast<std::size_t>(layers), 8);
        arch.activation = act;
        arch.skip = skip;
        arch.skip_hidden = {5, 5};
        arch.precision = Precision::Float64;
        const auto model = ScoreModel::create(arch, d, NoiseSchedule::vp(), Seed{static_cast<std::uint64_t>(layers)});
        const auto r = oracle::check_gradients(model, x0, t, eps);
        worst = std::max(worst, r.max_rel_err);
        checked += r.checked;
        skipped += r.skipped;
        const bool ok = r.max_rel_err < 1e-4 && r.checked > 0;
        if (!ok) out.pass = false;
        out.details.push_back(fmt::format("{} layer(s), {}, skip {}: max rel err {:.2e} ({} entries, {} at kinks)",
                                          layers, activation_name(act), skip_mode_name(skip), r.max_rel_err,
                                          r.checked, r.skipped));
      }
    }
  }
  out.summary = fmt::format("max relative error {:.2e} over 18 architectures ({} entries, {} skipped at ReLU kinks)",
                            worst, checked, skipped);
  return out;
}

Matrix uniform_square(Eigen::Index n, Seed seed) {
  Rng rng(seed);
  Matrix m(n, 2);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = rng.uniform();
  return m;
}

Outcome tid_behavior(const Context&) {
  const Matrix train = uniform_square(2000, Seed{501});
  // Same generator; half of the points are replaced by 5 copies of 200 of them.
  Matrix collapsed = uniform_square(2000, Seed{502});
  for (Eigen::Index i = 1000; i < 2000; ++i) collapsed.row(i) = collapsed.row((i - 1000) / 5);

  const double self = tid(train, train, 0.05);
  const double hill = hill_statistic({4, 2, 1});
  const double hill_ref = (std::log(4.0) + std::log(2.0) + std::log(1.0)) / 3.0;
  int positive = 0;
  double smallest = INFINITY;
  for (std::uint64_t s = 0; s < 10; ++s) {
    TidOptions opt;
    opt.seed = Seed{s};
    opt.subset = 1000;
    const double v = tid(train, collapsed, 0.05, opt);
    smallest = std::min(smallest, v);
    if (v > 0) ++positive;
  }
  Outcome out;
  out.pass = self == 0.0 && std::abs(hill - hill_ref) < 1e-9 && positive == 10;
  out.summary = fmt::format("TID(D, D) = {}, Hill([4, 2, 1]) = {:.9f}, constructed collapse TID > 0 for {}/10 subset "
                            "seeds (min {:.4f})",
                            self, hill, positive, smallest);
  return out;
}

double simpson_normal(const std::function<double(double)>& f) {
  const int n = 24000;
  const double a = -12, b = 12, h = (b - a) / n;
  auto g = [&](double x) { return f(x) * std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi); };
  double s = g(a) + g(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * g(a + i * h);
  return s * h / 3;
}

Outcome seesaw_closed_form(const Context&) {
  using namespace collapse::seesaw;
  bool monotone = true;
  bool strict = true;
  auto prev = seesaw_losses(1);
  for (int p = 2; p <= 20; ++p) {
    const auto cur = seesaw_losses(p);
    if (cur.low_noise > prev.low_noise || cur.high_noise < prev.high_noise) monotone = false;
    if (p % 2 == 1 && !(cur.low_noise < prev.low_noise && cur.high_noise > prev.high_noise)) strict = false;
    prev = cur;
  }
  double ortho = 0;
  for (int i = 0; i <= 10; ++i)
    for (int j = 0; j <= 10; ++j) {
      const double v = simpson_normal([&](double x) { return hermite_eval(i, x) * hermite_eval(j, x); });
      ortho = std::max(ortho, std::abs(v - (i == j ? 1.0 : 0.0)));
    }
  const auto coeffs = target_coeffs(0.0, 20);
  double even = 0;
  for (int i = 2; i <= 20; i += 2) even = std::max(even, std::abs(coeffs[static_cast<std::size_t>(i - 1)]));

  Outcome out;
  out.pass = monotone && strict && ortho < 1e-8 && even < 1e-12;
  out.summary = fmt::format("l1 non-increasing / l2 non-decreasing: {}, strict at odd p: {}, orthonormality error "
                            "{:.1e}, max even coefficient {:.1e}",
                            monotone ? "yes" : "no", strict ? "yes" : "no", ortho, even);
  out.details.push_back(fmt::format("p = 1: l1 = {:.6f}, l2 = {:.6f}; p = 20: l1 = {:.6f}, l2 = {:.6f}",
                                    seesaw_losses(1).low_noise, seesaw_losses(1).high_noise,
                                    seesaw_losses(20).low_noise, seesaw_losses(20).high_noise));
  return out;
}

}  // namespace

std::vector<Criterion> exact_criteria() {
  return {
      {1, "schedule exactness", 1.0, schedule_exactness},
      {2, "score oracle vs finite differences", 5.0, score_oracle},
      {3, "sampler fidelity with exact scores", 120.0, sampler_fidelity},
      {4, "DSM gradient correctness", 30.0, gradient_correctness},
      {5, "TID unit behaviour", 30.0, tid_behavior},
      {6, "see-saw closed form", 5.0, seesaw_closed_form},
  };
}

}  // namespace acceptance
