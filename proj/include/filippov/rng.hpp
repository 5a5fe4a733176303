#pragma once

#include <cstdint>

namespace filippov {

/// Counter-based deterministic generator (splitmix64 finalizer over a
/// keyed counter).  Draw i of stream s under seed k is a pure function of
/// (k, s, i), so parallel substreams reproduce regardless of scheduling.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(seed ^ mix(stream + 0x632BE59BD9B4E019ULL))), counter_(0) {}

  std::uint64_t next_u64() { return at(counter_++); }

  /// Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  /// Random access without advancing.
  std::uint64_t at(std::uint64_t i) const {
    return mix(key_ + i * 0x9E3779B97F4A7C15ULL);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace filippov
