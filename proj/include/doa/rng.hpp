#pragma once

// Reproducible random streams. Every stream is a std::mt19937_64 whose seed is
// derived from a base seed and a path of indices (for example
// {L-index, trial-index}) by repeated SplitMix64 mixing, so distinct trials get
// decorrelated, independent-looking streams and can run in any order.

#include <cstdint>
#include <initializer_list>
#include <random>

#include "doa/linalg.hpp"

namespace doa {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(base);
  for (std::uint64_t p : path) s = splitmix64(s ^ splitmix64(p + 0x632be59bd9b4e019ULL));
  return s;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Circular complex standard normal: real and imaginary parts N(0, 1/2).
  cplx complex_normal() {
    const double re = unit_(engine_);
    const double im = unit_(engine_);
    return {re * kHalfSqrt, im * kHalfSqrt};
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }

  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  double normal() { return unit_(engine_); }

  std::mt19937_64& engine() { return engine_; }

 private:
  static constexpr double kHalfSqrt = 0.70710678118654752440;
  std::mt19937_64 engine_;
  std::normal_distribution<double> unit_{0.0, 1.0};
};

}  // namespace doa
