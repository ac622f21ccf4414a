#pragma once

// Stochastic-model log-likelihood of L snapshots,
//
//   J(beta, O, delta) = -L W log(pi) - L (log|G| + trace[G^{-1} R_hat]),
//   G = A(beta) O A(beta)^H + diag(delta),
//
// its concentrated forms, the whitening transform, the low-rank inverse of G,
// and the gradient with respect to the directions.

#include "doa/linalg.hpp"
#include "doa/stochastic_model.hpp"

namespace doa {

/// One full parameter point (directions, source covariance, noise variances).
struct ModelParams {
  RVec betas;
  Mat source_cov;
  RVec noise;

  Index sources() const { return betas.size(); }
  Index sensors() const { return noise.size(); }

  /// Throws DomainError unless angles lie in (0, pi), source_cov is V x V
  /// Hermitian PSD and every noise variance is positive.
  void validate() const;
};

inline Mat model_covariance(const ModelParams& p) { return model_covariance(p.betas, p.source_cov, p.noise); }

struct WhitenedModel {
  Mat a_tilde;  // Q^{-1/2} A
  Mat r_tilde;  // Q^{-1/2} R_hat Q^{-1/2}
};

/// The constant of the circular complex Gaussian density, -L W log(pi).
double llf_constant(Index snapshots, Index sensors);

double log_likelihood(const SampleCovariance& r_hat, const ModelParams& params);

WhitenedModel whiten(const RVec& betas, const Mat& r_hat, const RVec& delta);

/// Maximizer of J over Hermitian O for fixed (beta, delta). Hermitian, but
/// not necessarily PSD.
Mat concentrated_source_cov(const RVec& betas, const RVec& delta, const Mat& r_hat);

/// H(beta, delta) with J(beta, O_hat(beta, delta), delta) = -L H - L W log(pi).
double concentrated_objective(const RVec& betas, const RVec& delta, const Mat& r_hat);

/// Orthogonal projector onto the column span of x.
Mat column_projector(const Mat& x);

struct UniformNoiseFit {
  double value = 0.0;  // |A O_hat A^H + delta_hat I|
  double noise = 0.0;
  Mat source_cov;
};

/// Closed-form concentration under uniform noise. Throws DomainError when the
/// residual noise estimate is not positive.
UniformNoiseFit uniform_concentrated_objective(const RVec& betas, const Mat& r_hat);

/// G^{-1} through the V x V system (O A~^H A~ + I)^{-1}; valid for rank
/// deficient O.
Mat fast_inverse(const RVec& betas, const Mat& source_cov, const RVec& delta);

/// dJ/dbeta holding O and delta fixed.
RVec llf_gradient_beta(const RVec& betas, const Mat& source_cov, const RVec& delta, const SampleCovariance& r_hat);

/// f(beta) = -J(beta, O, delta) / L for fixed (O, delta, R_hat), the function
/// the direction update descends on. Values and gradients share a
/// factorization of G.
class DirectionObjective {
 public:
  DirectionObjective(const Mat& source_cov, const RVec& delta, const Mat& r_hat);

  double value(const RVec& betas) const;

  /// Returns f and writes grad f into `grad`.
  double value_and_gradient(const RVec& betas, RVec& grad) const;

 private:
  Mat source_cov_;
  RVec delta_;
  Mat r_hat_;
  double constant_;
};

}  // namespace doa
