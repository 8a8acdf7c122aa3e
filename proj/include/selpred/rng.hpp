#pragma once

#include <cstdint>
#include <random>

namespace selpred {

using Rng = std::mt19937_64;

/// One step of the splitmix64 sequence; advances `state`.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for substream `stream` of the master `seed`.
///
/// Substreams are identified by the pair (seed, stream). Two different pairs
/// yield generator states that are unrelated for all practical purposes, so
/// replication i of an experiment always draws from stream i regardless of
/// which worker thread runs it.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed;
  const std::uint64_t a = splitmix64(state);
  state = a ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
  splitmix64(state);
  return splitmix64(state);
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t s = derive_seed(seed, stream);
  std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

// Stream ids used by the convenience overloads that take a bare seed.
inline constexpr std::uint64_t kTrainingStream = 0;
inline constexpr std::uint64_t kFutureStream = 1;

}  // namespace selpred
