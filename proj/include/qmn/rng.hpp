#pragma once

#include <cstdint>

namespace qmn {

/// Counter-based stream: output i of stream (seed, id) is a fixed function of
/// (seed, id, i), so any (seed, id) pair replays identically and distinct
/// pairs are statistically independent. SplitMix64 core.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
      : state_(mix(mix(master_seed + 0x9e3779b97f4a7c15ULL) ^
                   mix(stream_id + 0xbf58476d1ce4e5b9ULL))) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    return mix(z);
  }

  /// Uniform in [0,1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  std::uint64_t state_;
};

}  // namespace qmn
