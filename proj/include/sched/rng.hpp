#pragma once

// Reproducible random streams. A (master_seed, stream_index) pair must yield
// the same gain sequence on every platform, so randomness only ever flows
// through std::mt19937_64 (whose output sequence the standard pins down) and
// uniforms are built from the raw 64-bit words by explicit bit arithmetic —
// never through std::uniform_real_distribution, which is
// implementation-defined.

#include <cstdint>
#include <random>

namespace sched {

// Identifies one independent random stream.
struct SeededStream {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
};

namespace detail {

// SplitMix64 finalizer; decorrelates per-stream seeds derived from
// (master, index) pairs that differ in a few bits.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

inline std::mt19937_64 make_engine(SeededStream stream) {
  std::uint64_t s = stream.master_seed;
  s = detail::splitmix64(s ^ detail::splitmix64(stream.stream_index));
  return std::mt19937_64(s);
}

// Uniform double in [0, 1) from the top 53 bits of one engine word.
inline double next_uniform(std::mt19937_64& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

}  // namespace sched
