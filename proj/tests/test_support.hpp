#pragma once

// Random instance generators and comparison helpers shared by the test
// binaries.

#include <algorithm>
#include <cmath>
#include <functional>

#include "doa/likelihood.hpp"
#include "doa/rng.hpp"
#include "doa/stochastic_model.hpp"

namespace doa::testing {

inline double rel_err(const Mat& got, const Mat& want) {
  return (got - want).norm() / std::max(1e-300, want.norm());
}

inline double rel_err(const RVec& got, const RVec& want) {
  return (got - want).norm() / std::max(1e-300, want.norm());
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::max(1e-300, std::abs(want)); }

inline Mat random_complex(Rng& rng, Index rows, Index cols) {
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < cols; ++k) m(i, k) = rng.complex_normal();
  return m;
}

/// Random Hermitian PSD matrix of the given rank (rank == n gives PD a.s.).
inline Mat random_psd(Rng& rng, Index n, Index rank, double scale = 1.0) {
  const Mat f = random_complex(rng, n, rank);
  return hermitian_part(scale * f * f.adjoint());
}

/// Ascending directions with at least `min_sep` radians between neighbours
/// and away from endfire.
inline RVec random_betas(Rng& rng, Index v, double min_sep = 0.15, double margin = 0.2) {
  while (true) {
    RVec b(v);
    for (Index i = 0; i < v; ++i) b(i) = rng.uniform(margin, kPi - margin);
    std::sort(b.data(), b.data() + v);
    bool ok = true;
    for (Index i = 1; i < v; ++i) ok = ok && (b(i) - b(i - 1) > min_sep);
    if (ok) return b;
  }
}

inline RVec random_noise(Rng& rng, Index w, double lo = 0.5, double hi = 10.0) {
  RVec d(w);
  for (Index i = 0; i < w; ++i) d(i) = rng.uniform(lo, hi);
  return d;
}

inline ModelParams random_params(Rng& rng, Index w, Index v, Index rank = -1) {
  if (rank < 0) rank = v;
  return {random_betas(rng, v), random_psd(rng, v, rank, 2.0), random_noise(rng, w)};
}

inline Scenario to_scenario(const ModelParams& p) { return {p.sensors(), p.betas, p.source_cov, p.noise}; }

/// Sample covariance of a finite draw from the model at `p`.
inline SampleCovariance simulated(const ModelParams& p, Index snapshots, std::uint64_t seed) {
  return simulate_covariance(to_scenario(p), snapshots, seed);
}

/// Central difference of a scalar function of a real vector.
inline RVec central_difference(const std::function<double(const RVec&)>& f, const RVec& x, double h) {
  RVec g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    RVec xp = x;
    RVec xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

}  // namespace doa::testing
