#pragma once

#include <cstdint>
#include <random>

namespace l0rls {

/// Purpose tags for deriving independent RNG substreams from one base seed.
enum class StreamKind : std::uint64_t {
  System = 0,  ///< sparse system draw
  Input = 1,   ///< per-trial input sample stream
  Noise = 2,   ///< per-trial observation noise stream
  Lemma = 3,   ///< lemma-1 correlation-matrix trials
};

namespace detail {

// SplitMix64 finalizer; full-period bijection on 64-bit state.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Deterministic substream id from (purpose, index).
inline std::uint64_t stream_id(StreamKind kind, std::uint64_t index) {
  return (static_cast<std::uint64_t>(kind) << 48) ^ index;
}

/// Deterministic derived seed for (base_seed, purpose, index); also usable as
/// the base of a further derivation.
inline std::uint64_t derive_seed(std::uint64_t base_seed, StreamKind kind,
                                 std::uint64_t index = 0) {
  return detail::splitmix64(detail::splitmix64(base_seed) ^ stream_id(kind, index));
}

/// Engine seeded deterministically from (base_seed, stream). Distinct streams
/// land in statistically unrelated parts of the mt19937_64 seed space.
inline std::mt19937_64 make_rng(std::uint64_t base_seed, std::uint64_t stream) {
  return std::mt19937_64(detail::splitmix64(detail::splitmix64(base_seed) ^ stream));
}

inline std::mt19937_64 make_rng(std::uint64_t base_seed, StreamKind kind,
                                std::uint64_t index = 0) {
  return make_rng(base_seed, stream_id(kind, index));
}

}  // namespace l0rls
