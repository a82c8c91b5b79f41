#pragma once

#include <cstdint>

namespace nemco {

/// Deterministic counter-based random stream. Every draw is a pure function
/// of (seed, stream, counter) through the SplitMix64 finalizer, so
/// per-episode substreams are identical regardless of thread count,
/// scheduling order, or platform.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream)
      : key_(mix(mix(seed) ^ mix(stream ^ 0x5851f42d4c957f2dull))) {}

  uint64_t next_u64() {
    counter_ += 0x9e3779b97f4a7c15ull;
    return mix(key_ ^ counter_);
  }

  /// Uniform on the open interval (0, 1); endpoints are never returned, so
  /// quantile transforms stay finite.
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [lo, hi] (inclusive) via 128-bit multiply.
  int64_t uniform_int(int64_t lo, int64_t hi) {
    const uint64_t range = static_cast<uint64_t>(hi - lo) + 1;
    const auto wide =
        static_cast<unsigned __int128>(next_u64()) * range;
    return lo + static_cast<int64_t>(static_cast<uint64_t>(wide >> 64));
  }

 private:
  static uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace nemco
