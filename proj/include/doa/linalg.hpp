#pragma once

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace doa {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Raised when a covariance that must be positive definite is not, or is too
/// badly conditioned to be trusted.
class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (X + X^H) / 2
inline Mat hermitian_part(const Mat& x) { return (x + x.adjoint()) * 0.5; }

inline bool is_hermitian(const Mat& x, double tol = 1e-12) {
  if (x.rows() != x.cols()) return false;
  const double scale = 1.0 + x.cwiseAbs().maxCoeff();
  return (x - x.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

/// Eigenvalues of the Hermitian part of x, ascending.
inline RVec hermitian_eigenvalues(const Mat& x) {
  if (x.size() == 0) return RVec();
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(x), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

inline double min_eigenvalue(const Mat& x) {
  return x.size() == 0 ? 0.0 : hermitian_eigenvalues(x)(0);
}

/// Spectral norm of a Hermitian matrix.
inline double hermitian_norm(const Mat& x) {
  if (x.size() == 0) return 0.0;
  return hermitian_eigenvalues(x).cwiseAbs().maxCoeff();
}

/// PSD within a relative tolerance: lambda_min >= -tol * ||x||.
inline bool is_psd(const Mat& x, double rel_tol = 1e-10) {
  if (x.size() == 0) return true;
  const RVec ev = hermitian_eigenvalues(x);
  const double norm = ev.cwiseAbs().maxCoeff();
  return ev(0) >= -rel_tol * norm;
}

/// Cholesky factorization that certifies positive definiteness. Throws
/// SingularMatrixError when the factorization fails or when the condition
/// estimate (ratio of extreme squared Cholesky pivots) exceeds max_condition.
class PdFactor {
 public:
  explicit PdFactor(const Mat& g, double max_condition = 1e14, const char* what = "covariance")
      : llt_(hermitian_part(g)) {
    if (llt_.info() != Eigen::Success) {
      throw SingularMatrixError(std::string(what) + " is not positive definite");
    }
    const RVec d = llt_.matrixLLT().diagonal().real();
    const double lo = d.minCoeff();
    const double hi = d.maxCoeff();
    if (!(lo > 0.0) || (hi / lo) * (hi / lo) > max_condition) {
      throw SingularMatrixError(std::string(what) + " is numerically singular");
    }
    log_det_ = 2.0 * d.array().log().sum();
  }

  double log_det() const { return log_det_; }

  Mat solve(const Mat& b) const { return llt_.solve(b); }

  Mat inverse() const {
    const Index n = llt_.matrixLLT().rows();
    return hermitian_part(llt_.solve(Mat::Identity(n, n)));
  }

 private:
  Eigen::LLT<Mat> llt_;
  double log_det_ = 0.0;
};

/// Condition number of a Hermitian PD matrix from its eigenvalues; infinity
/// when the smallest eigenvalue is not positive.
inline double hermitian_condition(const Mat& x) {
  const RVec ev = hermitian_eigenvalues(x);
  if (!(ev(0) > 0.0)) return std::numeric_limits<double>::infinity();
  return ev(ev.size() - 1) / ev(0);
}

}  // namespace doa
