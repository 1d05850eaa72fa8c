#include "collapse/samplers.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "collapse/csv.hpp"
#include "collapse/error.hpp"

namespace collapse {

SamplerKind sampler_from_name(const std::string& name) {
  if (name == "ode") return SamplerKind::ODE;
  if (name == "sde") return SamplerKind::SDE;
  if (name == "ddim") return SamplerKind::DDIM;
  if (name == "pc") return SamplerKind::PC;
  if (name == "ald") return SamplerKind::ALD;
  if (name == "dpm2") return SamplerKind::DPM2;
  throw ParameterError(
      fmt::format("unknown sampler '{}' (expected ode, sde, ddim, pc, ald or dpm2)", name));
}

std::string sampler_name(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::ODE: return "ode";
    case SamplerKind::SDE: return "sde";
    case SamplerKind::DDIM: return "ddim";
    case SamplerKind::PC: return "pc";
    case SamplerKind::ALD: return "ald";
    case SamplerKind::DPM2: return "dpm2";
  }
  return "?";
}

bool is_deterministic(SamplerKind kind) {
  return kind == SamplerKind::ODE || kind == SamplerKind::DDIM || kind == SamplerKind::DPM2;
}

SamplerConfig SamplerConfig::defaults(SamplerKind kind) {
  SamplerConfig cfg;
  cfg.kind = kind;
  cfg.steps = kind == SamplerKind::SDE ? 1000 : 100;
  return cfg;
}

void SamplerConfig::validate() const {
  if (steps < 1) throw ParameterError(fmt::format("sampler steps must be >= 1, got {}", steps));
  if (!(t_end >= 0.0 && t_end < t_start && t_start <= 1.0)) {
    throw ParameterError(fmt::format("sampler times must satisfy 0 <= t_end < t_start <= 1, got ({}, {})",
                                     t_end, t_start));
  }
  if (kind == SamplerKind::PC) {
    if (!(snr >= 0.0)) throw ParameterError("pc snr must be >= 0");
    if (corrector_steps < 1) throw ParameterError("pc corrector_steps must be >= 1");
  }
  if (kind == SamplerKind::ALD) {
    if (ald_levels < 1) throw ParameterError("ald levels must be >= 1");
    if (ald_steps_per_level < 0) throw ParameterError("ald steps_per_level must be >= 0");
    if (!(ald_base_step > 0.0)) throw ParameterError("ald base_step must be > 0");
  }
}

Matrix ode_step(const ScoreSource& src, const Matrix& x, double t, double dt) {
  if (dt == 0.0) return x;
  return x - dt * src.velocity(x, t);
}

Matrix sde_step(const ScoreSource& src, const Matrix& x, double t, double dt, const Matrix& noise) {
  if (dt == 0.0) return x;
  const auto& sched = src.schedule();
  const double g2 = sched.diffusion_sq(t);
  const Matrix drift = sched.log_alpha_rate(t) * x - g2 * src.score(x, t);
  return x - dt * drift + std::sqrt(g2 * dt) * noise;
}

Matrix ddim_step(const ScoreSource& src, const Matrix& x, double t, double s) {
  if (s == t) return x;
  const auto& sched = src.schedule();
  const auto [alpha_t, sigma_t] = sched.coeffs(t);
  const auto [alpha_s, sigma_s] = sched.coeffs(s);
  if (alpha_t == 0.0) throw SingularityError(fmt::format("ddim: alpha_t = 0 at t = {}", t));
  const Matrix eps = src.eps(x, t);
  const Matrix x0 = (x - sigma_t * eps) / alpha_t;
  return alpha_s * x0 + sigma_s * eps;
}

Matrix corrector_step(const ScoreSource& src, const Matrix& x, double t, double snr, const Matrix& noise) {
  const Matrix score = src.score(x, t);
  const double alpha = src.schedule().alpha(t);
  Matrix out = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double score_norm = score.row(i).norm();
    if (score_norm == 0.0) continue;
    const double ratio = snr * noise.row(i).norm() / score_norm;
    const double step = alpha * ratio * ratio;
    out.row(i) += step * score.row(i) + std::sqrt(2.0 * step) * noise.row(i);
  }
  return out;
}

Matrix dpm2_step(const ScoreSource& src, const Matrix& x, double t, double s) {
  if (s == t) return x;
  const auto& sched = src.schedule();
  const auto [alpha_t, sigma_t] = sched.coeffs(t);
  const auto [alpha_s, sigma_s] = sched.coeffs(s);
  if (alpha_t == 0.0 || alpha_s == 0.0) throw SingularityError("dpm2: alpha vanishes on the step");
  const double lambda_t = std::log(alpha_t) - std::log(sigma_t);
  const double lambda_s = std::log(alpha_s) - std::log(sigma_s);
  const double h = lambda_s - lambda_t;
  const double mid = sched.time_for_log_snr(lambda_t + 0.5 * h, s, t);
  const auto [alpha_m, sigma_m] = sched.coeffs(mid);
  const Matrix eps_t = src.eps(x, t);
  const Matrix u = (alpha_m / alpha_t) * x - sigma_m * std::expm1(0.5 * h) * eps_t;
  const Matrix eps_mid = src.eps(u, mid);
  return (alpha_s / alpha_t) * x - sigma_s * std::expm1(h) * eps_mid;
}

namespace {

Matrix initial_noise(std::vector<Rng>& chains, int dim) {
  Matrix x(static_cast<Eigen::Index>(chains.size()), dim);
  for (std::size_t c = 0; c < chains.size(); ++c)
    for (int j = 0; j < dim; ++j) x(static_cast<Eigen::Index>(c), j) = chains[c].normal();
  return x;
}

std::vector<Rng> chain_streams(Eigen::Index n, Seed seed) {
  std::vector<Rng> chains;
  chains.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index c = 0; c < n; ++c) chains.emplace_back(seed.child(static_cast<std::uint64_t>(c)));
  return chains;
}

}  // namespace

Matrix ald_run(const ScoreSource& src, Eigen::Index n, int levels, int steps_per_level,
               double base_step, Seed seed) {
  if (levels < 1 || steps_per_level < 0 || !(base_step > 0.0)) {
    throw ParameterError("ald: levels >= 1, steps_per_level >= 0 and base_step > 0 required");
  }
  auto chains = chain_streams(n, seed);
  Matrix x = initial_noise(chains, src.dim());
  if (steps_per_level == 0) return x;
  const double t_hi = src.schedule().max_time();
  const double t_lo = std::max(src.t_min(), kDefaultTimeFloor);
  std::vector<double> times;
  if (levels == 1) {
    times = {t_lo};
  } else {
    times = time_grid(levels - 1, t_lo, t_hi);
  }
  const double sigma_last = src.schedule().sigma(times.back());
  Matrix noise(n, src.dim());
  for (double t : times) {
    const double sigma = src.schedule().sigma(t);
    const double step = base_step * (sigma * sigma) / (sigma_last * sigma_last);
    for (int k = 0; k < steps_per_level; ++k) {
      for (Eigen::Index c = 0; c < n; ++c)
        for (int j = 0; j < src.dim(); ++j) noise(c, j) = chains[static_cast<std::size_t>(c)].normal();
      x += step * src.score(x, t) + std::sqrt(2.0 * step) * noise;
    }
  }
  return x;
}

SampleResult run_sampler(const ScoreSource& src, const SamplerConfig& cfg, Eigen::Index n, Seed seed,
                         int record_stride) {
  cfg.validate();
  SampleResult result;
  result.samples.points = Matrix(n, src.dim());
  result.samples.seed = seed.value;
  if (n == 0) return result;

  if (cfg.kind == SamplerKind::ALD) {
    result.samples.points =
        ald_run(src, n, cfg.ald_levels, cfg.ald_steps_per_level, cfg.ald_base_step, seed);
    return result;
  }

  const double t_start = std::min(cfg.t_start, src.schedule().max_time());
  const auto grid = time_grid(cfg.steps, cfg.t_end, t_start);
  auto chains = chain_streams(n, seed);
  Matrix x = initial_noise(chains, src.dim());

  const bool needs_noise = cfg.kind == SamplerKind::SDE || cfg.kind == SamplerKind::PC;
  Matrix noise(needs_noise ? n : 0, src.dim());
  auto draw_noise = [&]() {
    for (Eigen::Index c = 0; c < n; ++c)
      for (int j = 0; j < src.dim(); ++j) noise(c, j) = chains[static_cast<std::size_t>(c)].normal();
  };

  Trajectory traj;
  auto record = [&](std::size_t k) {
    if (record_stride <= 0) return;
    if (k % static_cast<std::size_t>(record_stride) == 0 || k + 1 == grid.size()) {
      traj.times.push_back(grid[k]);
      traj.states.push_back(x);
    }
  };
  record(0);

  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double t = grid[k];
    const double s = grid[k + 1];
    switch (cfg.kind) {
      case SamplerKind::ODE:
        x = ode_step(src, x, t, t - s);
        break;
      case SamplerKind::SDE:
        draw_noise();
        x = sde_step(src, x, t, t - s, noise);
        break;
      case SamplerKind::DDIM:
        x = ddim_step(src, x, t, s);
        break;
      case SamplerKind::DPM2:
        x = dpm2_step(src, x, t, s);
        break;
      case SamplerKind::PC:
        x = ode_step(src, x, t, t - s);
        for (int m = 0; m < cfg.corrector_steps; ++m) {
          draw_noise();
          x = corrector_step(src, x, s, cfg.snr, noise);
        }
        break;
      case SamplerKind::ALD:
        break;
    }
    record(k + 1);
  }
  result.samples.points = std::move(x);
  if (record_stride > 0) result.trajectory = std::move(traj);
  return result;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path, int stride) {
  if (stride < 1) throw ParameterError("trajectory stride must be >= 1");
  const Eigen::Index dim = traj.states.empty() ? 0 : traj.states.front().cols();
  std::vector<std::string> header{"chain", "t"};
  for (Eigen::Index j = 0; j < dim; ++j) header.push_back(fmt::format("dim{}", j));
  CsvTable table(std::move(header));
  for (std::size_t k = 0; k < traj.times.size(); k += static_cast<std::size_t>(stride)) {
    const Matrix& xs = traj.states[k];
    for (Eigen::Index c = 0; c < xs.rows(); ++c) {
      std::vector<std::string> row{std::to_string(c), format_real(traj.times[k])};
      for (Eigen::Index j = 0; j < dim; ++j) row.push_back(format_real(xs(c, j)));
      table.add_row(std::move(row));
    }
  }
  table.write(path);
}

}  // namespace collapse
