#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ldiverted {

using Engine = std::mt19937_64;

// All randomness in the toolkit flows through engines derived from a user
// seed plus a stream tag, so that independent concerns (id assignment,
// per-attribute randomization, shuffling) consume independent streams and
// every run is reproducible from the seed alone.
inline Engine make_engine(std::uint64_t seed, std::uint64_t stream = 0,
                          std::uint64_t substream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(substream),
                    static_cast<std::uint32_t>(substream >> 32)};
  return Engine(seq);
}

// Stream tags for the fixed sub-generators.
enum : std::uint64_t {
  kStreamIds = 0x1d5,
  kStreamValues = 0x7a1,
  kStreamSaDraws = 0x5a0,
  kStreamShuffle = 0x5f1e,
};

inline std::uint64_t uniform_index(Engine& eng, std::uint64_t n) {
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(eng);
}

// Uniform real in [0, 1).
inline double uniform_real(Engine& eng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(eng);
}

template <typename T>
void fisher_yates(std::vector<T>& v, Engine& eng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(uniform_index(eng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// Random permutation of 0..n-1; used for tuple-id assignment. Depends only
// on the engine state (i.e. on (seed, n)), never on record contents.
inline std::vector<std::uint32_t> random_permutation(std::uint32_t n, Engine& eng) {
  std::vector<std::uint32_t> perm(n);
  for (std::uint32_t i = 0; i < n; ++i) perm[i] = i;
  fisher_yates(perm, eng);
  return perm;
}

// FNV-1a, used for the published seed fingerprint.
inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace ldiverted
