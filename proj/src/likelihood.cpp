#include "doa/likelihood.hpp"

#include <cmath>

#include "doa/array_geometry.hpp"

namespace doa {

namespace {

constexpr double kLogPi = 1.14472988584940017414;

void check_dims(const RVec& betas, const Mat& source_cov, const RVec& delta) {
  check_angles(betas);
  check_noise(delta);
  if (source_cov.rows() != betas.size() || source_cov.cols() != betas.size()) {
    throw DomainError("source covariance size does not match number of sources");
  }
}

void check_square(const Mat& r_hat, Index sensors) {
  if (r_hat.rows() != sensors || r_hat.cols() != sensors) {
    throw DomainError("sample covariance size does not match sensor count");
  }
}

// log|G| + trace[G^{-1} R]
double neg_llf_per_snapshot(const Mat& g, const Mat& r_hat) {
  const PdFactor chol(g, 1e14, "model covariance");
  return chol.log_det() + chol.solve(r_hat).trace().real();
}

}  // namespace

void ModelParams::validate() const {
  check_angles(betas);
  check_noise(noise);
  if (source_cov.rows() != betas.size()) throw DomainError("source covariance size does not match number of sources");
  check_source_cov(source_cov);
  if (betas.size() >= noise.size()) throw DomainError("number of sources must be smaller than number of sensors");
}

double llf_constant(Index snapshots, Index sensors) {
  return -static_cast<double>(snapshots) * static_cast<double>(sensors) * kLogPi;
}

double log_likelihood(const SampleCovariance& r_hat, const ModelParams& params) {
  check_dims(params.betas, params.source_cov, params.noise);
  check_square(r_hat.matrix, params.sensors());
  const Mat g = model_covariance(params);
  const double l = static_cast<double>(r_hat.snapshots);
  return llf_constant(r_hat.snapshots, params.sensors()) - l * neg_llf_per_snapshot(g, r_hat.matrix);
}

WhitenedModel whiten(const RVec& betas, const Mat& r_hat, const RVec& delta) {
  check_noise(delta);
  check_square(r_hat, delta.size());
  const RVec s = delta.cwiseSqrt().cwiseInverse();
  WhitenedModel out;
  out.a_tilde = s.asDiagonal() * manifold(betas, delta.size());
  out.r_tilde = hermitian_part(s.asDiagonal() * r_hat * s.asDiagonal());
  return out;
}

Mat column_projector(const Mat& x) {
  const Mat gram = x.adjoint() * x;
  const PdFactor chol(gram, 1e14, "array manifold Gram matrix");
  return hermitian_part(x * chol.solve(x.adjoint()));
}

Mat concentrated_source_cov(const RVec& betas, const RVec& delta, const Mat& r_hat) {
  const WhitenedModel wm = whiten(betas, r_hat, delta);
  const Index w = delta.size();
  const PdFactor gram(wm.a_tilde.adjoint() * wm.a_tilde, 1e14, "array manifold Gram matrix");
  // (A~^H A~)^{-1} A~^H
  const Mat pinv = gram.solve(wm.a_tilde.adjoint());
  return hermitian_part(pinv * (wm.r_tilde - Mat::Identity(w, w)) * pinv.adjoint());
}

double concentrated_objective(const RVec& betas, const RVec& delta, const Mat& r_hat) {
  const WhitenedModel wm = whiten(betas, r_hat, delta);
  const Index w = delta.size();
  const Mat proj = column_projector(wm.a_tilde);
  const Mat inner = hermitian_part(proj * wm.r_tilde * proj + (Mat::Identity(w, w) - proj));
  const PdFactor chol(inner, 1e14, "concentrated covariance");
  // log|Q^{1/2} M Q^{1/2}| = log|M| + sum log delta
  return chol.log_det() + delta.array().log().sum() + chol.solve(wm.r_tilde).trace().real();
}

UniformNoiseFit uniform_concentrated_objective(const RVec& betas, const Mat& r_hat) {
  const Index w = r_hat.rows();
  check_square(r_hat, w);
  const Mat a = manifold(betas, w);
  const Index v = a.cols();
  if (v >= w) throw DomainError("uniform concentration needs fewer sources than sensors");
  const PdFactor gram(a.adjoint() * a, 1e14, "array manifold Gram matrix");
  const Mat pinv = gram.solve(a.adjoint());
  const Mat proj = hermitian_part(a * pinv);

  UniformNoiseFit fit;
  fit.noise = ((Mat::Identity(w, w) - proj) * r_hat).trace().real() / static_cast<double>(w - v);
  if (!(fit.noise > 0.0)) throw DomainError("residual noise estimate is not positive");
  Mat shifted = r_hat;
  shifted.diagonal().array() -= fit.noise;
  fit.source_cov = hermitian_part(pinv * shifted * pinv.adjoint());
  Mat g = a * fit.source_cov * a.adjoint();
  g.diagonal().array() += fit.noise;
  fit.value = hermitian_part(g).determinant().real();
  return fit;
}

Mat fast_inverse(const RVec& betas, const Mat& source_cov, const RVec& delta) {
  check_dims(betas, source_cov, delta);
  const Index w = delta.size();
  const Index v = betas.size();
  const RVec s = delta.cwiseSqrt().cwiseInverse();
  const Mat at = s.asDiagonal() * manifold(betas, w);
  const Mat core = source_cov * at.adjoint() * at + Mat::Identity(v, v);
  Eigen::FullPivLU<Mat> lu(core);
  if (!lu.isInvertible()) throw SingularMatrixError("O A~^H A~ + I is singular");
  const Mat inner = Mat::Identity(w, w) - at * lu.solve(source_cov * at.adjoint());
  return s.asDiagonal() * inner * s.asDiagonal();
}

RVec llf_gradient_beta(const RVec& betas, const Mat& source_cov, const RVec& delta, const SampleCovariance& r_hat) {
  check_dims(betas, source_cov, delta);
  check_square(r_hat.matrix, delta.size());
  RVec grad;
  DirectionObjective(source_cov, delta, r_hat.matrix).value_and_gradient(betas, grad);
  return -static_cast<double>(r_hat.snapshots) * grad;
}

DirectionObjective::DirectionObjective(const Mat& source_cov, const RVec& delta, const Mat& r_hat)
    : source_cov_(source_cov), delta_(delta), r_hat_(r_hat), constant_(static_cast<double>(delta.size()) * kLogPi) {}

double DirectionObjective::value(const RVec& betas) const {
  const Mat a = manifold(betas, delta_.size());
  Mat g = a * source_cov_ * a.adjoint();
  g.diagonal().real() += delta_;
  return constant_ + neg_llf_per_snapshot(g, r_hat_);
}

double DirectionObjective::value_and_gradient(const RVec& betas, RVec& grad) const {
  const Index w = delta_.size();
  const Mat a = manifold(betas, w);
  const Mat da = manifold_derivative(betas, w);
  Mat g = a * source_cov_ * a.adjoint();
  g.diagonal().real() += delta_;
  const PdFactor chol(g, 1e14, "model covariance");
  const Mat g_inv = chol.inverse();
  const Mat g_inv_r = chol.solve(r_hat_);
  // d f / d beta_v = trace[M dG_v], M = G^{-1} - G^{-1} R G^{-1}, dG_v = D_v + D_v^H,
  // D_v = da_v e_v^T O A^H, so the trace is 2 Re[(O A^H)_{v,:} M da_v].
  const Mat m = g_inv - g_inv_r * g_inv;
  const Mat oah = source_cov_ * a.adjoint();
  const Mat mda = m * da;
  grad.resize(betas.size());
  for (Index v = 0; v < betas.size(); ++v) grad(v) = 2.0 * (oah.row(v) * mda.col(v))(0).real();
  return constant_ + chol.log_det() + g_inv_r.trace().real();
}

}  // namespace doa
