#pragma once

#include "gameopt/types.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace gameopt {

/// SplitMix64 finalizer, used to fold a label into a seed so derived streams
/// are unrelated even for adjacent labels.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t label);

/// Deterministic random source. Wraps std::mt19937_64 but derives all draws
/// itself: the standard library's distribution objects are implementation
/// defined, which would break byte-identical reproducibility across
/// toolchains. Same seed, same stream, everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller. Caches the second variate.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Integer uniform on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  Vector uniform_vector(Index d, double lo, double hi);
  Vector normal_vector(Index d);
  Matrix normal_matrix(Index rows, Index cols);

  /// Random orthogonal matrix: QR of a gaussian matrix with the R diagonal
  /// signs folded into Q so the result does not depend on the QR routine's
  /// sign convention.
  Matrix orthogonal_matrix(Index d);

  /// Fisher-Yates shuffle with draws from this stream.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Independent child stream derived from this stream's seed and a label.
  /// Does not consume draws from the parent.
  Rng split(std::uint64_t label) const { return Rng(mix_seed(seed_, label)); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace gameopt
