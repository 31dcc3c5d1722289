#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace magat {

using Rng = std::mt19937_64;

// splitmix64 finalizer, used to derive well-separated stream seeds from a
// master seed plus up to three stream tags (fold, atlas index, stage).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  s = splitmix64(s ^ c);
  return s;
}

// Unbiased integer in [0, n). Rejection sampling instead of
// std::uniform_int_distribution, whose output is implementation-defined.
inline std::uint64_t bounded_uint(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t r;
  do {
    r = rng();
  } while (r >= limit);
  return r % n;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform_double(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller; stdlib distributions are not portable
// across implementations.
inline double gaussian(Rng& rng) {
  double u1;
  do {
    u1 = uniform_double(rng);
  } while (u1 <= 0.0);
  const double u2 = uniform_double(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

// Fisher-Yates shuffle on top of bounded_uint, stable across platforms.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(bounded_uint(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace magat
