#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace cccpde {

/// xoshiro256** seeded through splitmix64. Not thread-safe; parallel callers
/// take independently derived instances.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Independent stream for a named subsystem ("data", "init", "shuffle", ...).
  static Rng derive(std::uint64_t root_seed, std::string_view label);

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer on [0, n). n must be positive.
  std::size_t below(std::size_t n);

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double gaussian();

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::vector<double> gaussian_draws(Rng& rng, std::size_t n);

/// Fisher-Yates shuffle driven by `rng` (platform independent, unlike std::shuffle).
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(items[i - 1], items[j]);
  }
}

/// Uniformly random permutation of 0..n-1.
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

}  // namespace cccpde
