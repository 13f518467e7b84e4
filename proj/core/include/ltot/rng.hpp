#pragma once

// Counter-based random draws.
//
// Every stochastic quantity in the project is a pure function of
// (seed, domain, key..., counter). There is no mutable generator state, so
// identical configurations replay bit-identically regardless of execution
// order, including under intra-rung parallelism.

#include <cmath>
#include <cstdint>

namespace ltot::rng {

// SplitMix64 finalizer. Good avalanche, cheap, and stable across platforms.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Draw-purpose domains. Keeping these disjoint guarantees that, e.g., the
// confirm probe of a branch never re-reads the randomness of its funded probe.
enum Domain : std::uint64_t {
  kDomainExpand = 1,
  kDomainConfirm = 2,
  kDomainCluster = 3,
  kDomainConsistency = 4,
  kDomainNoise = 5,
  kDomainSim = 6,
};

// A stream is an independent source of draws identified by a hashed key.
struct Stream {
  std::uint64_t key = 0;

  static Stream of(std::uint64_t seed, std::uint64_t domain, std::uint64_t a = 0,
                   std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t k = mix64(seed ^ 0x8824a3d7340a7a11ULL);
    k = mix64(k ^ domain);
    k = mix64(k ^ a);
    k = mix64(k ^ b);
    k = mix64(k ^ c);
    return Stream{k};
  }

  Stream sub(std::uint64_t a, std::uint64_t b = 0) const {
    return Stream{mix64(mix64(key ^ a) ^ b)};
  }
};

inline std::uint64_t bits(Stream s, std::uint64_t counter, std::uint64_t lane = 0) {
  return mix64(mix64(s.key ^ counter) ^ (lane + 0x6a09e667f3bcc909ULL));
}

// Uniform on (0,1): never returns 0 or 1, safe for inverse-CDF transforms.
inline double uniform(Stream s, std::uint64_t counter, std::uint64_t lane = 0) {
  const std::uint64_t u = bits(s, counter, lane) >> 11;  // 53 bits
  return (static_cast<double>(u) + 0.5) * (1.0 / 9007199254740992.0);
}

// Standard normal via Box-Muller on two fixed lanes of the same counter.
inline double gaussian(Stream s, std::uint64_t counter, std::uint64_t lane = 0) {
  const double u1 = uniform(s, counter, 2 * lane);
  const double u2 = uniform(s, counter, 2 * lane + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace ltot::rng
