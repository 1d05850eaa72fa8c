#pragma once

#include <array>
#include <cstdint>

#include "collapse/types.hpp"

namespace collapse {

/// Seed value for every stochastic operation.
struct Seed {
  std::uint64_t value = 0;

  constexpr Seed() = default;
  constexpr explicit Seed(std::uint64_t v) : value(v) {}

  /// Independent child stream identified by (this seed, index). Children of
  /// distinct indices never share state, so chains/batches can be drawn in
  /// any order or in parallel and reproduce the serial result.
  [[nodiscard]] Seed child(std::uint64_t index) const;

  friend constexpr bool operator==(Seed, Seed) = default;
};

/// xoshiro256** seeded through splitmix64.
///
/// Every draw is defined in terms of integer operations plus IEEE-754
/// arithmetic, so a seed produces the same doubles on every conforming
/// platform (std::normal_distribution gives no such guarantee).
class Rng {
 public:
  explicit Rng(Seed seed);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via the Marsaglia polar method.
  double normal();

  Vector normal_vector(Eigen::Index n);
  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);
  void fill_normal(Eigen::Ref<Matrix> out);

 private:
  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace collapse
