#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace sentibench {

// SplitMix64 (Steele/Lea/Vigna). The state advances by the golden-ratio
// increment and each output is a finalizer mix of the new state.
//
// Every seeded operation in the toolkit (splits, folds, subgradient
// sampling, weight init, batch shuffling, hyperparameter sampling) draws
// from this generator rather than <random>, so results are bit-identical
// across standard libraries and platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound), bound > 0, via 128-bit multiply-shift.
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

  // Uniform in [lo, hi).
  double next_in(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[next_below(i)]);
    }
  }

 private:
  std::uint64_t state_;
};

// Derives an independent stream seed from a base seed, so that e.g. fold 3
// of trial 7 gets its own reproducible generator.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  SplitMix64 g(base ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
  return g.next_u64();
}

}  // namespace sentibench
