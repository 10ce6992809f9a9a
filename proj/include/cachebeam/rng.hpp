#pragma once

/*
 * Counter-based pseudorandom generator. Every draw is a pure function of
 * (seed, stream, counter), so Monte Carlo runs are reproducible from the
 * seed alone and can be partitioned across workers in any way without
 * changing a single drawn value.
 */

#include <cstdint>

namespace cachebeam {

namespace detail {

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t word(std::uint64_t stream, std::uint64_t counter) const {
    std::uint64_t h = detail::mix64(seed_ ^ (stream * 0xC2B2AE3D27D4EB4FULL));
    return detail::mix64(h ^ (counter * 0x9E3779B97F4A7C15ULL));
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01(std::uint64_t stream, std::uint64_t counter) const {
    return static_cast<double>(word(stream, counter) >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
};

}  // namespace cachebeam
