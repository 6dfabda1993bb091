#pragma once

// Counter-based randomness. Every random quantity in the library is a pure
// function of (seed, stream tag, integer coordinates), so fields can be
// materialized lazily, in any order, from any thread, and reproduce exactly.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace bweb::rng {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Stream tags keep independent fields apart even under a shared seed.
enum class Stream : std::uint64_t {
  replica = 1,
  coin = 2,
  clock_count = 3,
  clock_time = 4,
  clock_direction = 5,
  gaussian = 6,
  bridge = 7,
  arm = 8,
  start = 9,
};

constexpr std::uint64_t key(std::uint64_t seed, Stream tag, std::int64_t a,
                            std::int64_t b = 0, std::int64_t c = 0) {
  std::uint64_t h = mix64(seed ^ 0xD1B54A32D192ED03ULL);
  h = mix64(h ^ (static_cast<std::uint64_t>(tag) * 0xA24BAED4963EE407ULL));
  h = mix64(h ^ static_cast<std::uint64_t>(a));
  h = mix64(h ^ static_cast<std::uint64_t>(b) * 0x9FB21C651E98DF25ULL);
  h = mix64(h ^ static_cast<std::uint64_t>(c) * 0xC2B2AE3D27D4EB4FULL);
  return h;
}

// Per-replica seed derived from a run seed.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index,
                                    std::uint64_t salt = 0) {
  return key(seed, Stream::replica, static_cast<std::int64_t>(index),
             static_cast<std::int64_t>(salt));
}

// Uniform on the open interval (0, 1).
constexpr double uniform(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via Box-Muller on two uniforms drawn from one key.
inline double normal(std::uint64_t h) {
  const double u1 = uniform(h);
  const double u2 = uniform(mix64(h ^ 0x5851F42D4C957F2DULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline double exponential(std::uint64_t h) { return -std::log(uniform(h)); }

// Poisson(mean) by sequential inversion; fine for the unit means used by
// the site clocks.
inline int poisson(std::uint64_t h, double mean) {
  const double u = uniform(h);
  double p = std::exp(-mean);
  double cdf = p;
  int k = 0;
  while (u > cdf && k < 1000) {
    ++k;
    p *= mean / k;
    cdf += p;
  }
  return k;
}

}  // namespace bweb::rng
