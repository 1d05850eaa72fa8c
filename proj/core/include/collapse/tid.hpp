#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "collapse/dataset.hpp"
#include "collapse/rng.hpp"

namespace collapse {

enum class TidConvention { Reciprocal, Raw };

TidConvention tid_convention_from_name(const std::string& name);
std::string tid_convention_name(TidConvention convention);

/// n_i = #{ j : |x_i - x_j| <= eps }, self included. With `dim`, distances use
/// that coordinate only.
std::vector<long> neighbor_counts(const Matrix& points, double eps, std::optional<int> dim = std::nullopt);

/// Mean log-ratio (1/k) sum_{i<=k} log(n_(i) / n_(k)) over the counts sorted in
/// descending order; k = N unless `top_k` is given.
double hill_statistic(const std::vector<long>& counts, std::optional<long> top_k = std::nullopt);

/// Tail index from a Hill statistic: 1/H (H = 0 gives +inf) or H itself.
double tail_index(double hill, TidConvention convention = TidConvention::Reciprocal);

struct TidOptions {
  long subset = 2000;
  Seed seed{0};
  std::optional<int> dim;
  TidConvention convention = TidConvention::Reciprocal;
  std::optional<long> top_k;
};

struct TidReport {
  std::vector<double> epsilons;
  std::vector<double> hill_train;
  std::vector<double> hill_sampled;
  std::vector<double> tail_index_train;
  std::vector<double> tail_index_sampled;
  std::vector<double> tid;
  long subset_used = 0;
  std::string metric;

  void write_csv(const std::string& path) const;
};

/// tail_index(train) - tail_index(sampled) at one eps. Both datasets are
/// reduced to `subset` rows drawn with the same seed stream. Throws
/// DegenerateTailError when both Hill statistics vanish.
double tid(const Matrix& train, const Matrix& sampled, double eps, const TidOptions& options = {});

TidReport tid_report(const Matrix& train, const Matrix& sampled, const std::vector<double>& epsilons,
                     const TidOptions& options = {});

/// (x, P(X > x)) for every distinct count x, ascending in x.
std::vector<std::pair<long, double>> tail_ccdf(const std::vector<long>& counts);

}  // namespace collapse
