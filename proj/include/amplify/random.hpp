// Deterministic sampling helpers. Every stochastic routine in this project
// takes an explicit Rng so that trajectories, training runs and sweeps are
// pure functions of their seeds.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace amplify {

using Rng = std::mt19937_64;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Uniform double in [0, 1) with 53-bit resolution.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n). Rejection keeps the draw unbiased.
inline int uniform_int(Rng& rng, int n) {
  if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
  const auto un = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return static_cast<int>(v % un);
}

// Box-Muller, cosine branch only: exactly two uniforms per sample, no
// cached state.
inline double standard_normal(Rng& rng) {
  double u1;
  do {
    u1 = uniform_unit(rng);
  } while (u1 <= 0.0);
  const double u2 = uniform_unit(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

inline double sample_normal(Rng& rng, double mean, double stddev) {
  if (stddev < 0.0) throw std::invalid_argument("sample_normal: stddev < 0");
  if (stddev == 0.0) return mean;
  return mean + stddev * standard_normal(rng);
}

// Rejection sampling; consumes no draws when stddev == 0 (degenerate case
// returns the clamped mean).
inline double truncated_normal(Rng& rng, double mean, double stddev, double lo,
                               double hi) {
  if (!(lo < hi)) throw std::invalid_argument("truncated_normal: lo >= hi");
  if (stddev < 0.0) throw std::invalid_argument("truncated_normal: stddev < 0");
  if (stddev == 0.0) return std::clamp(mean, lo, hi);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const double x = mean + stddev * standard_normal(rng);
    if (x >= lo && x <= hi) return x;
  }
  throw std::runtime_error("truncated_normal: rejection did not terminate");
}

// ---- seed derivation --------------------------------------------------
// Sweep cells derive their seeds from stable content hashes, so adding grid
// points or reordering cells never perturbs existing results.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

}  // namespace amplify
