#include "doa/crlb.hpp"

#include <cmath>
#include <stdexcept>

#include "doa/array_geometry.hpp"

namespace doa {

namespace {

enum class Kind { beta, diag, re, im, noise };

struct Coordinate {
  Kind kind;
  Index p = 0;
  Index q = 0;
};

Coordinate locate(Index sources, Index sensors, Index i) {
  const Index n = parameter_count(sources, sensors);
  if (i < 0 || i >= n) throw std::out_of_range("parameter index " + std::to_string(i) + " out of range");
  if (i < sources) return {Kind::beta, i, i};
  i -= sources;
  if (i < sources) return {Kind::diag, i, i};
  i -= sources;
  const Index off = sources * (sources - 1);
  if (i < off) {
    // Pairs (p, q), p < q, row-major over the strict upper triangle.
    Index pair = i / 2;
    for (Index p = 0; p < sources; ++p) {
      const Index row = sources - 1 - p;
      if (pair < row) return {i % 2 == 0 ? Kind::re : Kind::im, p, p + 1 + pair};
      pair -= row;
    }
  }
  i -= off;
  return {Kind::noise, i, i};
}

Mat derivative(const Coordinate& c, const Mat& a, const Mat& da, const Mat& o, Index sensors) {
  const cplx j(0.0, 1.0);
  switch (c.kind) {
    case Kind::beta: {
      // D_v = da_v e_v^T O A^H
      const Mat d = da.col(c.p) * (o.row(c.p) * a.adjoint());
      return d + d.adjoint();
    }
    case Kind::diag:
      return a.col(c.p) * a.col(c.p).adjoint();
    case Kind::re: {
      const Mat x = a.col(c.p) * a.col(c.q).adjoint();
      return x + x.adjoint();
    }
    case Kind::im: {
      const Mat x = a.col(c.p) * a.col(c.q).adjoint();
      return j * (x - x.adjoint());
    }
    case Kind::noise: {
      Mat e = Mat::Zero(sensors, sensors);
      e(c.p, c.p) = 1.0;
      return e;
    }
  }
  return Mat();
}

}  // namespace

Index parameter_count(Index sources, Index sensors) { return sources + sources * sources + sensors; }

std::string parameter_name(Index sources, Index sensors, Index i) {
  const Coordinate c = locate(sources, sensors, i);
  const auto one = [](Index k) { return std::to_string(k + 1); };
  switch (c.kind) {
    case Kind::beta:
      return "beta[" + one(c.p) + "]";
    case Kind::diag:
      return "O[" + one(c.p) + "," + one(c.p) + "]";
    case Kind::re:
      return "Re O[" + one(c.p) + "," + one(c.q) + "]";
    case Kind::im:
      return "Im O[" + one(c.p) + "," + one(c.q) + "]";
    case Kind::noise:
      return "delta[" + one(c.p) + "]";
  }
  return {};
}

Mat dG_dtheta(const ModelParams& params, Index i) {
  const Index v = params.sources();
  const Index w = params.sensors();
  const Coordinate c = locate(v, w, i);
  const Mat a = manifold(params.betas, w);
  const Mat da = manifold_derivative(params.betas, w);
  return derivative(c, a, da, params.source_cov, w);
}

FisherInformation fisher_information(const ModelParams& params, Index snapshots) {
  params.validate();
  if (snapshots < 1) throw DomainError("snapshot count must be >= 1");
  const Index v = params.sources();
  const Index w = params.sensors();
  const Index n = parameter_count(v, w);
  const Mat a = manifold(params.betas, w);
  const Mat da = manifold_derivative(params.betas, w);
  const PdFactor chol(model_covariance(params), 1e14, "model covariance");

  std::vector<Mat> x(static_cast<std::size_t>(n));
  FisherInformation fim{RMat(n, n), {}};
  for (Index i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] = chol.solve(derivative(locate(v, w, i), a, da, params.source_cov, w));
    fim.names.push_back(parameter_name(v, w, i));
  }
  const double l = static_cast<double>(snapshots);
  for (Index i = 0; i < n; ++i) {
    for (Index k = i; k < n; ++k) {
      // trace(X_i X_k) = sum_{rc} X_i(r,c) X_k(c,r)
      const double t = x[static_cast<std::size_t>(i)].cwiseProduct(x[static_cast<std::size_t>(k)].transpose()).sum().real();
      fim.matrix(i, k) = l * t;
      fim.matrix(k, i) = l * t;
    }
  }
  return fim;
}

RVec crlb_beta(const ModelParams& params, Index snapshots) {
  const FisherInformation fim = fisher_information(params, snapshots);
  const Index n = fim.matrix.rows();
  Eigen::SelfAdjointEigenSolver<RMat> es(fim.matrix);
  const RVec ev = es.eigenvalues();
  if (!(ev(0) > 0.0) || ev(n - 1) / ev(0) > 1e14) throw SingularMatrixError("Fisher information is singular");
  const RMat inv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  RVec out = inv.diagonal().head(params.sources());
  for (Index v = 0; v < out.size(); ++v) {
    if (!(out(v) > 0.0)) throw SingularMatrixError("non-positive direction bound");
  }
  return out;
}

RVec crlb_beta_deg(const ModelParams& params, Index snapshots) {
  RVec b = crlb_beta(params, snapshots);
  for (Index v = 0; v < b.size(); ++v) b(v) = rad2deg(std::sqrt(b(v)));
  return b;
}

}  // namespace doa
