#include "collapse/tid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "collapse/csv.hpp"
#include "collapse/error.hpp"

namespace collapse {

TidConvention tid_convention_from_name(const std::string& name) {
  if (name == "reciprocal") return TidConvention::Reciprocal;
  if (name == "raw") return TidConvention::Raw;
  throw ParameterError(fmt::format("unknown tid convention '{}' (expected reciprocal or raw)", name));
}

std::string tid_convention_name(TidConvention convention) {
  return convention == TidConvention::Reciprocal ? "reciprocal" : "raw";
}

namespace {

std::vector<long> counts_1d(const Matrix& points, int dim, double eps) {
  const Eigen::Index n = points.rows();
  std::vector<std::pair<double, Eigen::Index>> sorted(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) sorted[static_cast<std::size_t>(i)] = {points(i, dim), i};
  std::sort(sorted.begin(), sorted.end());
  std::vector<long> counts(static_cast<std::size_t>(n));
  std::size_t lo = 0;
  std::size_t hi = 0;
  const std::size_t m = sorted.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double v = sorted[i].first;
    while (v - sorted[lo].first > eps) ++lo;
    if (hi < i) hi = i;
    while (hi + 1 < m && sorted[hi + 1].first - v <= eps) ++hi;
    counts[static_cast<std::size_t>(sorted[i].second)] = static_cast<long>(hi - lo + 1);
  }
  return counts;
}

std::vector<long> counts_full(const Matrix& points, double eps) {
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  const double eps_sq = eps * eps;
  std::vector<long> counts(static_cast<std::size_t>(n), 1);
  constexpr Eigen::Index kBlock = 256;
  for (Eigen::Index b0 = 0; b0 < n; b0 += kBlock) {
    const Eigen::Index b1 = std::min(n, b0 + kBlock);
    for (Eigen::Index i = b0; i < b1; ++i) {
      const double* xi = points.row(i).data();
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double* xj = points.row(j).data();
        double acc = 0.0;
        for (Eigen::Index k = 0; k < d; ++k) {
          const double diff = xi[k] - xj[k];
          acc += diff * diff;
        }
        if (acc <= eps_sq) {
          ++counts[static_cast<std::size_t>(i)];
          ++counts[static_cast<std::size_t>(j)];
        }
      }
    }
  }
  return counts;
}

}  // namespace

std::vector<long> neighbor_counts(const Matrix& points, double eps, std::optional<int> dim) {
  if (points.rows() < 1) throw ParameterError("neighbor_counts: dataset is empty");
  if (!(eps > 0.0)) throw ParameterError(fmt::format("neighbor_counts: eps must be > 0, got {}", eps));
  if (dim) {
    if (*dim < 0 || *dim >= points.cols()) {
      throw ParameterError(
          fmt::format("neighbor_counts: dim {} out of range for {} columns", *dim, points.cols()));
    }
    return counts_1d(points, *dim, eps);
  }
  return counts_full(points, eps);
}

double hill_statistic(const std::vector<long>& counts, std::optional<long> top_k) {
  if (counts.empty()) throw ParameterError("hill_statistic: counts are empty");
  std::vector<long> sorted = counts;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  if (sorted.back() < 1) throw ParameterError("hill_statistic: counts must be >= 1");
  std::size_t k = sorted.size();
  if (top_k) {
    if (*top_k < 1) throw ParameterError("hill_statistic: top_k must be >= 1");
    k = std::min(k, static_cast<std::size_t>(*top_k));
  }
  const double ref = std::log(static_cast<double>(sorted[k - 1]));
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(static_cast<double>(sorted[i])) - ref;
  return sum / static_cast<double>(k);
}

double tail_index(double hill, TidConvention convention) {
  if (convention == TidConvention::Raw) return hill;
  if (hill == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / hill;
}

namespace {

struct Prepared {
  Matrix train;
  Matrix sampled;
};

Prepared prepare(const Matrix& train, const Matrix& sampled, const TidOptions& options) {
  if (train.cols() != sampled.cols()) {
    throw ParameterError(fmt::format("tid: dimension mismatch ({} vs {})", train.cols(), sampled.cols()));
  }
  if (train.rows() < 1 || sampled.rows() < 1) throw ParameterError("tid: datasets must be nonempty");
  if (options.subset < 1) throw ParameterError("tid: subset must be >= 1");
  const Eigen::Index count = std::min<Eigen::Index>({options.subset, train.rows(), sampled.rows()});
  return {take_rows(train, choose_rows(train.rows(), count, options.seed)),
          take_rows(sampled, choose_rows(sampled.rows(), count, options.seed))};
}

struct TidEntry {
  double hill_train;
  double hill_sampled;
  double alpha_train;
  double alpha_sampled;
  double tid;
};

TidEntry tid_entry(const Prepared& p, double eps, const TidOptions& options) {
  TidEntry e{};
  e.hill_train = hill_statistic(neighbor_counts(p.train, eps, options.dim), options.top_k);
  e.hill_sampled = hill_statistic(neighbor_counts(p.sampled, eps, options.dim), options.top_k);
  if (e.hill_train == 0.0 && e.hill_sampled == 0.0) {
    throw DegenerateTailError(fmt::format(
        "tid: both neighbor-count distributions are constant at eps = {} (no tail to compare)", eps));
  }
  e.alpha_train = tail_index(e.hill_train, options.convention);
  e.alpha_sampled = tail_index(e.hill_sampled, options.convention);
  e.tid = e.alpha_train - e.alpha_sampled;
  return e;
}

}  // namespace

double tid(const Matrix& train, const Matrix& sampled, double eps, const TidOptions& options) {
  return tid_entry(prepare(train, sampled, options), eps, options).tid;
}

TidReport tid_report(const Matrix& train, const Matrix& sampled, const std::vector<double>& epsilons,
                     const TidOptions& options) {
  const Prepared p = prepare(train, sampled, options);
  TidReport report;
  report.subset_used = static_cast<long>(p.train.rows());
  report.metric = options.dim ? fmt::format("dim{}", *options.dim) : std::string("l2");
  for (double eps : epsilons) {
    const TidEntry e = tid_entry(p, eps, options);
    report.epsilons.push_back(eps);
    report.hill_train.push_back(e.hill_train);
    report.hill_sampled.push_back(e.hill_sampled);
    report.tail_index_train.push_back(e.alpha_train);
    report.tail_index_sampled.push_back(e.alpha_sampled);
    report.tid.push_back(e.tid);
  }
  return report;
}

void TidReport::write_csv(const std::string& path) const {
  CsvTable table({"epsilon", "hill_train", "hill_sampled", "alpha_train", "alpha_sampled", "tid"});
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    table.add_row(std::vector<double>{epsilons[i], hill_train[i], hill_sampled[i], tail_index_train[i],
                                      tail_index_sampled[i], tid[i]});
  }
  table.write(path);
}

std::vector<std::pair<long, double>> tail_ccdf(const std::vector<long>& counts) {
  if (counts.empty()) throw ParameterError("tail_ccdf: counts are empty");
  std::vector<long> sorted = counts;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<std::pair<long, double>> out;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    out.emplace_back(sorted[i], static_cast<double>(sorted.size() - j) / n);
    i = j;
  }
  return out;
}

}  // namespace collapse
