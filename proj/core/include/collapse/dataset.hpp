#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "collapse/rng.hpp"
#include "collapse/types.hpp"

namespace collapse {

struct MogSpec;

/// 4x4 board of unit cells on [0,4]^2; cells with even floor(x)+floor(y) hold
/// the points, uniformly within each cell.
struct ChessboardSpec {
  int cells_per_side = 4;
  double cell_size = 1.0;
};

/// One spiral arm: radius grows linearly 0 -> max_radius while the angle
/// sweeps 0 -> 2*pi*turns; isotropic Gaussian jitter of noise_std.
struct SpiralSpec {
  double max_radius = 2.0;
  double turns = 2.0;
  double noise_std = 0.1;
};

/// Upper arc centred at (0.5, 0.1) and lower arc centred at (-0.5, -0.1).
struct SemicirclesSpec {
  double radius = 1.0;
  double noise_std = 0.1;
};

/// Equal-weight components evenly spaced on a circle.
struct Mog2DSpec {
  int components = 6;
  double ring_radius = 2.0;
  double component_std = 0.2;
};

/// 0.5 N(-1_n, s I) + 0.5 N(+1_n, s I). `spread_is_variance` selects whether
/// `spread` is the per-dimension variance (default) or standard deviation.
struct MogNDSpec {
  int dimension = 10;
  double spread = 0.2;
  bool spread_is_variance = true;
};

/// The one-dimensional member of the MogND family.
struct Mog1DSpec {
  double spread = 0.2;
  bool spread_is_variance = true;
};

using DatasetSpec =
    std::variant<ChessboardSpec, SpiralSpec, SemicirclesSpec, Mog2DSpec, MogNDSpec, Mog1DSpec>;

struct Dataset {
  Matrix points;
  std::optional<DatasetSpec> spec;
  std::optional<std::uint64_t> seed;

  [[nodiscard]] Eigen::Index size() const { return points.rows(); }
  [[nodiscard]] Eigen::Index dim() const { return points.cols(); }
};

/// Dimension of samples drawn from `spec`. Throws ParameterError on invalid parameters.
int dataset_dimension(const DatasetSpec& spec);
void validate(const DatasetSpec& spec);
std::string dataset_kind_name(const DatasetSpec& spec);

/// Draws `n` rows. Rows are generated from per-row child streams of `seed`, so
/// the first k rows of gen_dataset(spec, n, s) equal gen_dataset(spec, k, s).
Dataset gen_dataset(const DatasetSpec& spec, std::size_t n, Seed seed);

/// Closed-form mixture for the Gaussian-mixture variants; nullopt otherwise.
std::optional<MogSpec> mog_spec_for(const DatasetSpec& spec);

/// Evenly spaced times from t_max down to t_min inclusive (steps + 1 values).
std::vector<double> time_grid(int steps, double t_min, double t_max);

/// Uniform draw of `count` distinct row indices (all rows, in order, if count >= n).
std::vector<Eigen::Index> choose_rows(Eigen::Index n, Eigen::Index count, Seed seed);
Matrix take_rows(const Matrix& points, const std::vector<Eigen::Index>& rows);

}  // namespace collapse
