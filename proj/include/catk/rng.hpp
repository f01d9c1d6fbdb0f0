#pragma once

#include <cstdint>

namespace catk {

/// Counter-free splittable PRNG (splitmix64). Each (seed, stream) pair
/// yields an independent deterministic stream, so work items can be
/// distributed over any number of workers and still reproduce bit-for-bit.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Stream keyed by (seed, index); used for per-auction substreams.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(detail::mix64(seed ^ detail::mix64(index + 0x9e3779b97f4a7c15ULL)));
}

}  // namespace catk
