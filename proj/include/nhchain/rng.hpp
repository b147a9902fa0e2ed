#pragma once

#include <cstdint>

namespace nhchain {

// Counter-based pseudo-random numbers (SplitMix64 finalizer).
//
// The value at counter i is mix64(seed + (i + 1) * 0x9E3779B97F4A7C15),
// where mix64 is the SplitMix64 output function:
//   z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9;
//   z ^= z >> 27;  z *= 0x94D049BB133111EB;
//   z ^= z >> 31;
// Any (seed, counter) pair maps to the same 64-bit word on every platform,
// which makes sweeps and network initialization reproducible without
// carrying generator state around. random_at(seed, 0), random_at(seed, 1),
// ... is exactly the SplitMix64 stream seeded with `seed`.

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t random_at(std::uint64_t seed, std::uint64_t counter) {
  return mix64(seed + (counter + 1) * 0x9E3779B97F4A7C15ULL);
}

// Maps a 64-bit word to [0, 1) using the top 53 bits.
inline double to_unit_double(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline double uniform_at(std::uint64_t seed, std::uint64_t counter, double lo,
                         double hi) {
  return lo + (hi - lo) * to_unit_double(random_at(seed, counter));
}

// Sequential convenience wrapper over the same stream.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next() { return random_at(seed_, counter_++); }

  double next_unit() { return to_unit_double(next()); }

  // Uniform integer in [0, n) via rejection-free scaling; n must be > 0.
  std::uint64_t next_below(std::uint64_t n) {
    // 64x64 -> 128 bit multiply keeps the mapping exactly uniform enough
    // for shuffles (bias < 2^-64 per draw).
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace nhchain
