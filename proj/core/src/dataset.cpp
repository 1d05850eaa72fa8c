#include "collapse/dataset.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "collapse/error.hpp"
#include "collapse/mog.hpp"

namespace collapse {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_nonneg(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw ParameterError(fmt::format("{} must be finite and >= 0, got {}", name, value));
  }
}

void require_pos(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ParameterError(fmt::format("{} must be finite and > 0, got {}", name, value));
  }
}

double as_variance(double spread, bool is_variance) { return is_variance ? spread : spread * spread; }

}  // namespace

void validate(const DatasetSpec& spec) {
  std::visit(Overloaded{
                 [](const ChessboardSpec& s) {
                   if (s.cells_per_side < 1) throw ParameterError("chessboard needs >= 1 cell per side");
                   require_pos(s.cell_size, "chessboard cell_size");
                 },
                 [](const SpiralSpec& s) {
                   require_pos(s.max_radius, "spiral max_radius");
                   require_pos(s.turns, "spiral turns");
                   require_nonneg(s.noise_std, "spiral noise_std");
                 },
                 [](const SemicirclesSpec& s) {
                   require_pos(s.radius, "semicircles radius");
                   require_nonneg(s.noise_std, "semicircles noise_std");
                 },
                 [](const Mog2DSpec& s) {
                   if (s.components < 1) throw ParameterError("mog2d needs >= 1 component");
                   require_nonneg(s.ring_radius, "mog2d ring_radius");
                   require_pos(s.component_std, "mog2d component_std");
                 },
                 [](const MogNDSpec& s) {
                   if (s.dimension < 1) throw ParameterError("mog_nd dimension must be >= 1");
                   require_pos(s.spread, "mog_nd spread");
                 },
                 [](const Mog1DSpec& s) { require_pos(s.spread, "mog1d spread"); },
             },
             spec);
}

int dataset_dimension(const DatasetSpec& spec) {
  if (const auto* nd = std::get_if<MogNDSpec>(&spec)) return nd->dimension;
  if (std::holds_alternative<Mog1DSpec>(spec)) return 1;
  return 2;
}

std::string dataset_kind_name(const DatasetSpec& spec) {
  return std::visit(Overloaded{
                        [](const ChessboardSpec&) { return std::string("chessboard"); },
                        [](const SpiralSpec&) { return std::string("spiral"); },
                        [](const SemicirclesSpec&) { return std::string("semicircles"); },
                        [](const Mog2DSpec&) { return std::string("mog2d"); },
                        [](const MogNDSpec&) { return std::string("mog_nd"); },
                        [](const Mog1DSpec&) { return std::string("mog1d"); },
                    },
                    spec);
}

std::optional<MogSpec> mog_spec_for(const DatasetSpec& spec) {
  if (const auto* nd = std::get_if<MogNDSpec>(&spec)) {
    return MogSpec::symmetric_pair(nd->dimension, as_variance(nd->spread, nd->spread_is_variance));
  }
  if (const auto* one = std::get_if<Mog1DSpec>(&spec)) {
    return MogSpec::symmetric_pair(1, as_variance(one->spread, one->spread_is_variance));
  }
  if (const auto* ring = std::get_if<Mog2DSpec>(&spec)) {
    MogSpec out;
    const int k = ring->components;
    out.weights.assign(k, 1.0 / k);
    out.means = Matrix(k, 2);
    for (int i = 0; i < k; ++i) {
      const double angle = 2.0 * std::numbers::pi * i / k;
      out.means(i, 0) = ring->ring_radius * std::cos(angle);
      out.means(i, 1) = ring->ring_radius * std::sin(angle);
    }
    // Equal weights 1/k may not sum to exactly 1 in floating point.
    const double total = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
    out.weights.back() += 1.0 - total;
    out.variances.assign(k, ring->component_std * ring->component_std);
    return out;
  }
  return std::nullopt;
}

namespace {

void fill_row(const DatasetSpec& spec, Rng& rng, Eigen::Ref<RowVector> row) {
  std::visit(Overloaded{
                 [&](const ChessboardSpec& s) {
                   // Active cells: (i + j) even.
                   const int n = s.cells_per_side;
                   const int active = (n * n + 1) / 2;
                   auto pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(active)));
                   int i = 0;
                   int j = 0;
                   for (int c = 0; c < n * n; ++c) {
                     if (((c / n) + (c % n)) % 2 != 0) continue;
                     if (pick-- == 0) {
                       i = c / n;
                       j = c % n;
                       break;
                     }
                   }
                   row[0] = s.cell_size * (i + rng.uniform());
                   row[1] = s.cell_size * (j + rng.uniform());
                 },
                 [&](const SpiralSpec& s) {
                   const double span = 2.0 * std::numbers::pi * s.turns;
                   const double angle = rng.uniform(0.0, span);
                   const double radius = s.max_radius * angle / span;
                   row[0] = radius * std::cos(angle) + s.noise_std * rng.normal();
                   row[1] = radius * std::sin(angle) + s.noise_std * rng.normal();
                 },
                 [&](const SemicirclesSpec& s) {
                   const bool upper = rng.uniform() < 0.5;
                   const double angle = rng.uniform(0.0, std::numbers::pi);
                   const double cx = upper ? 0.5 : -0.5;
                   const double cy = upper ? 0.1 : -0.1;
                   const double sign = upper ? 1.0 : -1.0;
                   row[0] = cx + s.radius * std::cos(angle) + s.noise_std * rng.normal();
                   row[1] = cy + sign * s.radius * std::sin(angle) + s.noise_std * rng.normal();
                 },
                 [&](const Mog2DSpec& s) {
                   const auto k = static_cast<int>(rng.below(static_cast<std::uint64_t>(s.components)));
                   const double angle = 2.0 * std::numbers::pi * k / s.components;
                   row[0] = s.ring_radius * std::cos(angle) + s.component_std * rng.normal();
                   row[1] = s.ring_radius * std::sin(angle) + s.component_std * rng.normal();
                 },
                 [&](const MogNDSpec& s) {
                   const double centre = rng.uniform() < 0.5 ? -1.0 : 1.0;
                   const double sd = std::sqrt(as_variance(s.spread, s.spread_is_variance));
                   for (Eigen::Index j = 0; j < row.size(); ++j) row[j] = centre + sd * rng.normal();
                 },
                 [&](const Mog1DSpec& s) {
                   const double centre = rng.uniform() < 0.5 ? -1.0 : 1.0;
                   row[0] = centre + std::sqrt(as_variance(s.spread, s.spread_is_variance)) * rng.normal();
                 },
             },
             spec);
}

}  // namespace

Dataset gen_dataset(const DatasetSpec& spec, std::size_t n, Seed seed) {
  validate(spec);
  const int d = dataset_dimension(spec);
  Dataset out;
  out.points = Matrix(static_cast<Eigen::Index>(n), d);
  out.spec = spec;
  out.seed = seed.value;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(seed.child(i));
    fill_row(spec, rng, out.points.row(static_cast<Eigen::Index>(i)));
  }
  return out;
}

std::vector<double> time_grid(int steps, double t_min, double t_max) {
  if (steps < 1) throw ParameterError(fmt::format("time grid needs >= 1 step, got {}", steps));
  if (!(t_min >= 0.0 && t_min < t_max && t_max <= 1.0)) {
    throw ParameterError(
        fmt::format("time grid requires 0 <= t_min < t_max <= 1, got ({}, {})", t_min, t_max));
  }
  std::vector<double> grid(static_cast<std::size_t>(steps) + 1);
  const double span = t_max - t_min;
  for (int k = 0; k <= steps; ++k) {
    grid[k] = t_max - span * (static_cast<double>(k) / steps);
  }
  grid.front() = t_max;
  grid.back() = t_min;
  return grid;
}

std::vector<Eigen::Index> choose_rows(Eigen::Index n, Eigen::Index count, Seed seed) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  if (count >= n) return idx;
  Rng rng(seed);
  // Partial Fisher-Yates: the first `count` slots become a uniform sample.
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(count));
  return idx;
}

Matrix take_rows(const Matrix& points, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), points.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = points.row(rows[i]);
  return out;
}

}  // namespace collapse
