#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace dcsim {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic random stream. mt19937_64 output is fixed by the standard,
/// and uniform() avoids std::uniform_real_distribution (whose mapping is
/// implementation defined), so identical seeds reproduce identical draws on
/// every platform.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  /// Substream for run `index` of a batch seeded with `seed`. Used by the
  /// trial runner so runs can be merged order-independently.
  static RandomStream substream(std::uint64_t seed, std::uint64_t index) {
    return RandomStream(splitmix64(seed) ^
                        splitmix64(index * 0x9e3779b97f4a7c15ULL + 0x42ULL));
  }

  /// Uniform in [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Inverse-CDF draw over non-negative weights (need not sum to 1): the
  /// first index whose cumulative weight strictly exceeds the scaled draw.
  /// Zero-weight entries are never selected.
  std::size_t sample_index(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double u = uniform() * total;
    double acc = 0.0;
    std::size_t last_positive = weights.size();
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      acc += weights[i];
      last_positive = i;
      if (u < acc) return i;
    }
    // Float leakage at the top of the CDF: fall back to the last live entry.
    return last_positive;
  }

private:
  std::mt19937_64 gen_;
};

}  // namespace dcsim
