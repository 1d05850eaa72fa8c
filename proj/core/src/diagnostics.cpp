#include "collapse/diagnostics.hpp"

#include <cmath>

#include <fmt/format.h>

#include "collapse/csv.hpp"
#include "collapse/error.hpp"
#include "collapse/mog.hpp"

namespace collapse {

namespace {

void check_same_dim(const ScoreSource& a, const ScoreSource& b) {
  if (a.dim() != b.dim()) {
    throw ParameterError(fmt::format("diagnostics: dimension mismatch ({} vs {})", a.dim(), b.dim()));
  }
}

}  // namespace

double velocity_mae(const ScoreSource& model, const ScoreSource& oracle, double t, Eigen::Index n_points,
                    Seed seed) {
  check_same_dim(model, oracle);
  if (n_points < 1) throw ParameterError("velocity_mae: n_points must be >= 1");
  const MogSpec* spec = oracle.mixture();
  if (spec == nullptr) throw ParameterError("velocity_mae: reference must be a mixture oracle");
  const auto [alpha, sigma] = oracle.schedule().coeffs(t);
  Matrix x = alpha * mog_sample(*spec, n_points, seed.child(0));
  Rng rng(seed.child(1));
  x += sigma * rng.normal_matrix(n_points, model.dim());
  const Matrix diff = model.velocity(x, t) - oracle.velocity(x, t);
  return diff.cwiseAbs().mean();
}

VelocityGrid velocity_grid(const ScoreSource& src, int dim, std::pair<double, double> x_range,
                           std::pair<double, double> t_range, int x_resolution, int t_resolution,
                           Seed seed) {
  if (dim < 0 || dim >= src.dim()) throw ParameterError(fmt::format("velocity_grid: dim {} out of range", dim));
  if (x_resolution < 2 || t_resolution < 2) throw ParameterError("velocity_grid: resolution must be >= 2");
  VelocityGrid grid;
  for (int j = 0; j < x_resolution; ++j) {
    grid.xs.push_back(x_range.first + (x_range.second - x_range.first) * j / (x_resolution - 1));
  }
  for (int i = 0; i < t_resolution; ++i) {
    grid.ts.push_back(t_range.first + (t_range.second - t_range.first) * i / (t_resolution - 1));
  }
  Rng rng(seed);
  const RowVector frozen = rng.normal_vector(src.dim()).transpose();
  Matrix x(x_resolution, src.dim());
  for (int j = 0; j < x_resolution; ++j) {
    x.row(j) = frozen;
    x(j, dim) = grid.xs[static_cast<std::size_t>(j)];
  }
  grid.values.resize(t_resolution, x_resolution);
  for (int i = 0; i < t_resolution; ++i) {
    grid.values.row(i) = src.velocity(x, grid.ts[static_cast<std::size_t>(i)]).col(dim).transpose();
  }
  return grid;
}

void VelocityGrid::write_csv(const std::string& path) const {
  CsvTable table({"x", "t", "v"});
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = 0; j < xs.size(); ++j)
      table.add_row(std::vector<double>{xs[j], ts[i],
                                        values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
  table.write(path);
}

std::vector<CovariancePoint> error_covariance(const ScoreSource& model, const ScoreSource& oracle, int steps,
                                              Eigen::Index n_chains, SamplerKind kind, Seed seed,
                                              double t_end) {
  check_same_dim(model, oracle);
  if (kind != SamplerKind::ODE && kind != SamplerKind::SDE) {
    throw ParameterError("error_covariance: sampler must be ode or sde");
  }
  if (n_chains < 1) throw ParameterError("error_covariance: n_chains must be >= 1");
  SamplerConfig cfg;
  cfg.kind = kind;
  cfg.steps = steps;
  cfg.t_end = t_end;
  const auto result = run_sampler(model, cfg, n_chains, seed, 1);
  const Trajectory& traj = *result.trajectory;

  auto centered_error = [&](std::size_t k) {
    const double t = traj.times[k];
    Matrix e = model.velocity(traj.states[k], t) - oracle.velocity(traj.states[k], t);
    e.rowwise() -= e.colwise().mean();
    return e;
  };
  const Matrix e_start = centered_error(0);
  const double norm = static_cast<double>(n_chains) * model.dim();
  std::vector<CovariancePoint> out;
  out.reserve(traj.times.size());
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const Matrix e = k == 0 ? e_start : centered_error(k);
    out.push_back({traj.times[k], e.cwiseProduct(e_start).sum() / norm});
  }
  return out;
}

void write_covariance_csv(const std::vector<CovariancePoint>& points, const std::string& path) {
  CsvTable table({"t", "c"});
  for (const auto& p : points) table.add_row(std::vector<double>{p.t, p.c});
  table.write(path);
}

double DensityHistogram::bin_width() const {
  if (bin_centers.size() < 2) return 0.0;
  return bin_centers[1] - bin_centers[0];
}

DensityHistogram density_evolution(const Trajectory& traj, int dim, int bins, std::pair<double, double> range) {
  if (traj.empty()) throw ParameterError("density_evolution: trajectory is empty");
  if (bins < 1) throw ParameterError("density_evolution: bins must be >= 1");
  if (!(range.second > range.first)) throw ParameterError("density_evolution: empty range");
  const Eigen::Index d = traj.states.front().cols();
  if (dim < 0 || dim >= d) throw ParameterError(fmt::format("density_evolution: dim {} out of range", dim));

  DensityHistogram hist;
  const double width = (range.second - range.first) / bins;
  for (int b = 0; b < bins; ++b) hist.bin_centers.push_back(range.first + (b + 0.5) * width);
  hist.times = traj.times;
  hist.density = Matrix::Zero(static_cast<Eigen::Index>(traj.times.size()), bins);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    const Matrix& xs = traj.states[k];
    long inside = 0;
    for (Eigen::Index c = 0; c < xs.rows(); ++c) {
      const double v = xs(c, dim);
      if (!(v >= range.first && v <= range.second)) continue;
      int b = static_cast<int>((v - range.first) / width);
      if (b >= bins) b = bins - 1;
      hist.density(static_cast<Eigen::Index>(k), b) += 1.0;
      ++inside;
    }
    if (inside > 0) hist.density.row(static_cast<Eigen::Index>(k)) /= static_cast<double>(inside) * width;
  }
  return hist;
}

void DensityHistogram::write_csv(const std::string& path) const {
  CsvTable table({"t", "bin_center", "density"});
  for (std::size_t k = 0; k < times.size(); ++k)
    for (std::size_t b = 0; b < bin_centers.size(); ++b)
      table.add_row(std::vector<double>{times[k], bin_centers[b],
                                        density(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(b))});
  table.write(path);
}

}  // namespace collapse
