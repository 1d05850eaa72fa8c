#pragma once

#include <string>
#include <utility>
#include <vector>

#include "collapse/samplers.hpp"
#include "collapse/score_source.hpp"

namespace collapse {

/// Mean over points and coordinates of |v_model - v_oracle| at time t, with
/// test points drawn from the oracle's marginal at t.
double velocity_mae(const ScoreSource& model, const ScoreSource& oracle, double t, Eigen::Index n_points,
                    Seed seed);

struct VelocityGrid {
  std::vector<double> xs;
  std::vector<double> ts;
  Matrix values;  ///< ts.size() x xs.size(), entry (i, j) = v(x_j, t_i)[dim]

  void write_csv(const std::string& path) const;
};

/// Coordinate `dim` of the velocity over an (x, t) grid; the other coordinates
/// are frozen at one standard-normal draw from `seed`.
VelocityGrid velocity_grid(const ScoreSource& src, int dim, std::pair<double, double> x_range,
                           std::pair<double, double> t_range, int x_resolution, int t_resolution,
                           Seed seed);

struct CovariancePoint {
  double t;
  double c;
};

/// Centered covariance between model-velocity errors along trajectories and
/// the errors at the start time, per coordinate:
///   c(t) = 1/(n d) sum_chains <e(x_t, t) - mean_t, e(x_1, 1) - mean_1>.
/// Trajectories are driven by `model` with an ODE or SDE sampler.
std::vector<CovariancePoint> error_covariance(const ScoreSource& model, const ScoreSource& oracle, int steps,
                                              Eigen::Index n_chains, SamplerKind kind, Seed seed,
                                              double t_end = kDefaultTimeFloor);

void write_covariance_csv(const std::vector<CovariancePoint>& points, const std::string& path);

struct DensityHistogram {
  std::vector<double> times;
  std::vector<double> bin_centers;
  Matrix density;  ///< times x bins, each row integrates to 1 over the range

  [[nodiscard]] double bin_width() const;
  void write_csv(const std::string& path) const;
};

/// Per recorded time, a normalised histogram of coordinate `dim` over the
/// chains that fall inside `range`.
DensityHistogram density_evolution(const Trajectory& traj, int dim, int bins, std::pair<double, double> range);

}  // namespace collapse
