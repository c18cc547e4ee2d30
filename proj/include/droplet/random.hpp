#pragma once

// Counter-based seed derivation and portable variates. Every random stream is
// a function of (master seed, stream tag, index) only, so results do not
// depend on the order in which samples are processed.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace droplet {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for item `index` of stream `tag` under `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ tag) + index);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, std::uint64_t tag, std::uint64_t index) {
  return Rng(derive_seed(master, tag, index));
}

/// Uniform on [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Standard normal by Box-Muller.
inline double standard_normal(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 == 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline std::complex<double> complex_normal(Rng& rng) {
  const double re = standard_normal(rng);
  return {re, standard_normal(rng)};
}

}  // namespace droplet
