#pragma once

#include <cstdint>

#include "doa/array_geometry.hpp"
#include "doa/linalg.hpp"

namespace doa {

/// Ground truth for simulation: W sensors, V < W sources at `betas` (radians)
/// with source covariance `source_cov` (V x V Hermitian PSD) and per-sensor
/// noise variances `noise` (length W, strictly positive).
struct Scenario {
  Index sensors = 0;
  RVec betas;
  Mat source_cov;
  RVec noise;

  Index sources() const { return betas.size(); }

  /// Throws DomainError on any violated invariant.
  void validate() const;
};

/// W x L snapshot block, column t is r(t).
struct SnapshotMatrix {
  Mat data;
  std::uint64_t seed = 0;

  Index sensors() const { return data.rows(); }
  Index count() const { return data.cols(); }
};

/// R_hat = (1/L) sum_t r(t) r(t)^H together with the L it was formed from.
struct SampleCovariance {
  Mat matrix;
  Index snapshots = 0;

  Index sensors() const { return matrix.rows(); }
};

void check_source_cov(const Mat& o, double rel_tol = 1e-10);
void check_noise(const RVec& delta);

/// Factor S with S S^H = O from the eigendecomposition of O. Eigenvalues in
/// [-1e-10 ||O||, 0) are clipped to zero so rank-deficient (coherent) source
/// covariances factor cleanly; anything more negative throws DomainError.
Mat psd_sqrt(const Mat& o);

/// Draws L snapshots r(t) = A S z_k(t) + diag(sqrt(delta)) z_j(t) with
/// circular standard normal z. Deterministic in (scenario, L, seed).
SnapshotMatrix sample_snapshots(const Scenario& scenario, Index count, std::uint64_t seed);

SampleCovariance sample_covariance(const SnapshotMatrix& snapshots);

/// Draws L snapshots and returns only their sample covariance.
SampleCovariance simulate_covariance(const Scenario& scenario, Index count, std::uint64_t seed);

/// G = A O A^H + diag(delta). Throws SingularMatrixError if G is not PD.
Mat model_covariance(const RVec& betas, const Mat& source_cov, const RVec& delta);

inline Mat model_covariance(const Scenario& s) { return model_covariance(s.betas, s.source_cov, s.noise); }

}  // namespace doa
