// rng.hpp -- deterministic hashing and pseudo-random streams.
//
// All randomness in the library flows through the fixed 64-bit mix below
// (the splitmix64 finalizer), so identical seeds give bitwise-identical
// results across runs, platforms and thread counts.
#pragma once

#include <cstdint>

namespace ci {

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

// Hash of (seed, i, j); order of i and j matters to the caller.
inline std::uint64_t hash3(std::uint64_t seed, std::uint64_t i, std::uint64_t j) {
  std::uint64_t h = mix64(seed + 0x9E3779B97F4A7C15ull);
  h = mix64(h ^ (i + 0xD1B54A32D192ED03ull));
  h = mix64(h ^ (j + 0x8CB92BA72F3D8DD7ull));
  return h;
}

// Map the top 53 bits of a hash to a double in [0, 1).
inline double unit_double(std::uint64_t h) {
  return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

// Value in [-1, 1) from (seed, i, j).
inline double symmetric_double(std::uint64_t seed, std::uint64_t i, std::uint64_t j) {
  return 2.0 * unit_double(hash3(seed, i, j)) - 1.0;
}

}  // namespace ci
