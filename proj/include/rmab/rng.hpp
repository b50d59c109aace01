#pragma once

#include <cstdint>

namespace rmab {

/// Counter-based deterministic randomness. Every draw is a pure hash of
/// (seed, stream, a, b), so results do not depend on evaluation order or on
/// how arms are split across threads.
namespace rng {

inline uint64_t mix(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t hash(uint64_t seed, uint64_t stream, uint64_t a,
                     uint64_t b = 0) {
  return mix(mix(mix(mix(seed) ^ stream) ^ a) ^ b);
}

/// Uniform in [0, 1) with 53 random bits.
inline double uniform(uint64_t seed, uint64_t stream, uint64_t a,
                      uint64_t b = 0) {
  return static_cast<double>(hash(seed, stream, a, b) >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). Bias is O(n / 2^64), irrelevant at our sizes.
inline uint64_t pick(uint64_t seed, uint64_t stream, uint64_t a, uint64_t b,
                     uint64_t n) {
  return static_cast<uint64_t>(
      (static_cast<unsigned __int128>(hash(seed, stream, a, b)) * n) >> 64);
}

// Stream tags keep independent uses of one seed from colliding.
namespace streams {
constexpr uint64_t transitions = 1;     // weekly state draws, keyed (arm, week)
constexpr uint64_t generator = 2;       // cohort synthesis, keyed (arm, field)
constexpr uint64_t predictor_init = 3;  // weight init, keyed (param index)
constexpr uint64_t bootstrap = 4;       // resampling, keyed (replicate, slot)
constexpr uint64_t initial_state = 5;   // cohort starting states, keyed (arm)
constexpr uint64_t policy = 6;          // randomized call selection, keyed (week, draw)
}  // namespace streams

}  // namespace rng
}  // namespace rmab
