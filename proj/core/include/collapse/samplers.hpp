#pragma once

#include <optional>
#include <string>
#include <vector>

#include "collapse/dataset.hpp"
#include "collapse/score_source.hpp"

namespace collapse {

enum class SamplerKind { ODE, SDE, DDIM, PC, ALD, DPM2 };

SamplerKind sampler_from_name(const std::string& name);
std::string sampler_name(SamplerKind kind);
bool is_deterministic(SamplerKind kind);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::ODE;
  int steps = 100;
  double t_start = 1.0;
  double t_end = kDefaultTimeFloor;
  /// Predictor-corrector: Langevin signal-to-noise ratio and corrector steps per node.
  double snr = 0.16;
  int corrector_steps = 1;
  /// Annealed Langevin.
  int ald_levels = 100;
  int ald_steps_per_level = 10;
  double ald_base_step = 2e-5;

  /// Default step counts: ODE-like samplers 100, SDE 1000.
  static SamplerConfig defaults(SamplerKind kind);
  void validate() const;
};

/// Recorded states x_t, one N x d block per recorded time.
struct Trajectory {
  std::vector<double> times;
  std::vector<Matrix> states;

  [[nodiscard]] bool empty() const { return times.empty(); }
};

/// Euler step of the probability-flow ODE from t to t - dt.
Matrix ode_step(const ScoreSource& src, const Matrix& x, double t, double dt);
/// Euler-Maruyama step of the reverse SDE; `noise` is N(0, I) per entry.
Matrix sde_step(const ScoreSource& src, const Matrix& x, double t, double dt, const Matrix& noise);
/// Deterministic DDIM update from t to s < t.
Matrix ddim_step(const ScoreSource& src, const Matrix& x, double t, double s);
/// One Langevin correction at time t; step size alpha_t (r |z| / |score|)^2 per chain.
Matrix corrector_step(const ScoreSource& src, const Matrix& x, double t, double snr, const Matrix& noise);
/// Second-order DPM solver step from t to s (midpoint in log-SNR).
Matrix dpm2_step(const ScoreSource& src, const Matrix& x, double t, double s);

/// Annealed Langevin dynamics from N(0, I) over `levels` noise levels.
Matrix ald_run(const ScoreSource& src, Eigen::Index n, int levels, int steps_per_level,
               double base_step, Seed seed);

struct SampleResult {
  Dataset samples;
  std::optional<Trajectory> trajectory;
};

/// Runs n chains from x_1 ~ N(0, I) over time_grid(cfg.steps, t_end, t_start).
/// Every random draw of chain c comes from seed.child(c), so chains are
/// independent of batch composition. When `record_stride` > 0 the states at
/// every record_stride-th grid node (plus the first and last) are kept.
SampleResult run_sampler(const ScoreSource& src, const SamplerConfig& cfg, Eigen::Index n, Seed seed,
                         int record_stride = 0);

/// Columns `chain,t,dim0,...`; every stride-th recorded time.
void write_trajectory_csv(const Trajectory& traj, const std::string& path, int stride = 1);

}  // namespace collapse
