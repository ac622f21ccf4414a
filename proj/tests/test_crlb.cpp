#include <doctest.h>

#include <unsupported/Eigen/KroneckerProduct>

#include "doa/array_geometry.hpp"
#include "doa/crlb.hpp"
#include "test_support.hpp"

using namespace doa;
using namespace doa::testing;

namespace {

ModelParams coherent_truth() {
  ModelParams p{RVec(2), Mat::Constant(2, 2, cplx(2.0, 0.0)), RVec(6)};
  p.betas << deg2rad(50.0), deg2rad(100.0);
  p.noise << 1, 2, 3, 4, 2, 10;
  return p;
}

// Apply a step of size h along coordinate i, building the perturbed
// parameters by hand from the documented ordering.
ModelParams nudged(const ModelParams& p, Index i, double h) {
  ModelParams q = p;
  const Index v = p.sources();
  if (i < v) {
    q.betas(i) += h;
    return q;
  }
  i -= v;
  if (i < v) {
    q.source_cov(i, i) += h;
    return q;
  }
  i -= v;
  for (Index r = 0; r < v; ++r) {
    for (Index c = r + 1; c < v; ++c) {
      if (i == 0) {
        q.source_cov(r, c) += h;
        q.source_cov(c, r) += h;
        return q;
      }
      if (i == 1) {
        q.source_cov(r, c) += cplx(0.0, h);
        q.source_cov(c, r) -= cplx(0.0, h);
        return q;
      }
      i -= 2;
    }
  }
  q.noise(i) += h;
  return q;
}

}  // namespace

TEST_CASE("parameter layout") {
  CHECK(parameter_count(2, 6) == 2 + 4 + 6);
  CHECK(parameter_count(3, 5) == 3 + 9 + 5);
  CHECK(parameter_name(2, 6, 0) == "beta[1]");
  CHECK(parameter_name(2, 6, 2) == "O[1,1]");
  CHECK(parameter_name(2, 6, 4) == "Re O[1,2]");
  CHECK(parameter_name(2, 6, 5) == "Im O[1,2]");
  CHECK(parameter_name(2, 6, 6) == "delta[1]");
  CHECK(parameter_name(2, 6, 11) == "delta[6]");
  const FisherInformation fim = fisher_information(coherent_truth(), 100);
  CHECK(fim.names.size() == 12);
  CHECK(fim.names[6] == "delta[1]");
}

TEST_CASE("dG for the noise and diagonal source coordinates") {
  const ModelParams p = coherent_truth();
  for (Index w = 0; w < 6; ++w) {
    Mat e = Mat::Zero(6, 6);
    e(w, w) = 1.0;
    CHECK(rel_err(dG_dtheta(p, 6 + w), e) < 1e-15);
  }
  const CVec a1 = steering_vector(p.betas(0), 6);
  CHECK(rel_err(dG_dtheta(p, 2), Mat(a1 * a1.adjoint())) < 1e-14);
  CHECK_THROWS_AS(dG_dtheta(p, 12), std::out_of_range);
  CHECK_THROWS_AS(dG_dtheta(p, -1), std::out_of_range);
}

TEST_CASE("dG agrees with finite differences on every coordinate") {
  Rng rng(81);
  const double h = 1e-6;
  for (int trial = 0; trial < 30; ++trial) {
    const Index w = rng.uniform_int(3, 8);
    const Index v = rng.uniform_int(1, std::min(3, static_cast<int>(w) - 1));
    const ModelParams p = random_params(rng, w, v);
    for (Index i = 0; i < parameter_count(v, w); ++i) {
      const Mat fd = (model_covariance(nudged(p, i, h)) - model_covariance(nudged(p, i, -h))) / (2.0 * h);
      CHECK((dG_dtheta(p, i) - fd).norm() <= 1e-6 * (1.0 + fd.norm()));
    }
  }
}

TEST_CASE("FIM matches the Kronecker form and is symmetric PSD") {
  Rng rng(82);
  for (int trial = 0; trial < 20; ++trial) {
    const Index w = rng.uniform_int(3, 7);
    const Index v = rng.uniform_int(1, std::min(3, static_cast<int>(w) - 1));
    const ModelParams p = random_params(rng, w, v);
    const Index n = parameter_count(v, w);
    const Mat gi = model_covariance(p).inverse();
    const Mat kron = Eigen::kroneckerProduct(Mat(gi.transpose()), gi);
    Mat cols(w * w, n);
    for (Index i = 0; i < n; ++i) {
      const Mat d = dG_dtheta(p, i);
      cols.col(i) = Eigen::Map<const CVec>(d.data(), w * w);
    }
    const RMat want = 37.0 * (cols.adjoint() * kron * cols).real();
    const RMat got = fisher_information(p, 37).matrix;
    CHECK((got - want).norm() <= 1e-10 * want.norm());
    CHECK((got - got.transpose()).norm() <= 1e-12 * got.norm());
    CHECK(Eigen::SelfAdjointEigenSolver<RMat>(got).eigenvalues().minCoeff() >= -1e-9 * got.norm());
  }
}

TEST_CASE("noise block is L / delta^2 with no sources") {
  ModelParams p{RVec::Constant(1, 1.0), Mat::Zero(1, 1), RVec(4)};
  p.noise << 0.5, 1.0, 2.0, 4.0;
  const RMat f = fisher_information(p, 10).matrix;
  for (Index w = 0; w < 4; ++w) {
    CHECK(f(2 + w, 2 + w) == doctest::Approx(10.0 / (p.noise(w) * p.noise(w))).epsilon(1e-12));
    for (Index k = 0; k < 4; ++k)
      if (k != w) CHECK(std::abs(f(2 + w, 2 + k)) < 1e-12);
  }
}

TEST_CASE("bound scales as 1/L") {
  const ModelParams p = coherent_truth();
  const RVec b100 = crlb_beta(p, 100);
  const RVec b200 = crlb_beta(p, 200);
  CHECK(rel_err(RVec(b200 * 2.0), b100) < 1e-12);
  const RVec s = crlb_beta_deg(p, 500);
  CHECK(rel_err(s, RVec(b100.cwiseSqrt() / std::sqrt(5.0) * 180.0 / kPi)) < 1e-12);
  CHECK((b100.array() > 0.0).all());
}

TEST_CASE("bound is regular and finite for the fully coherent scenario") {
  const RVec s = crlb_beta_deg(coherent_truth(), 500);
  CHECK(std::isfinite(s(0)));
  CHECK(std::isfinite(s(1)));
  CHECK(s(0) > 0.05);
  CHECK(s(0) < 2.0);
}

TEST_CASE("bound is symmetric under source relabelling") {
  Rng rng(83);
  const ModelParams p = random_params(rng, 6, 2);
  ModelParams q = p;
  q.betas << p.betas(1), p.betas(0);
  q.source_cov << p.source_cov(1, 1), p.source_cov(1, 0), p.source_cov(0, 1), p.source_cov(0, 0);
  const RVec a = crlb_beta(p, 100);
  const RVec b = crlb_beta(q, 100);
  CHECK(a(0) == doctest::Approx(b(1)).epsilon(1e-9));
  CHECK(a(1) == doctest::Approx(b(0)).epsilon(1e-9));
}

TEST_CASE("more power and more snapshots tighten the bound") {
  Rng rng(84);
  for (int trial = 0; trial < 20; ++trial) {
    const ModelParams p = random_params(rng, 6, 2);
    ModelParams louder = p;
    louder.source_cov *= 4.0;
    const RVec base = crlb_beta(p, 100);
    CHECK((crlb_beta(louder, 100).array() < base.array()).all());
    CHECK((crlb_beta(p, 150).array() < base.array()).all());
  }
}

TEST_CASE("single-source bound agrees with the scalar Schur complement") {
  // With one source the beta bound is 1 / (F_bb - F_bn F_nn^-1 F_nb).
  Rng rng(85);
  const ModelParams p = random_params(rng, 5, 1);
  const RMat f = fisher_information(p, 50).matrix;
  const Index n = f.rows();
  const RMat fnn = f.bottomRightCorner(n - 1, n - 1);
  const RVec fnb = f.col(0).tail(n - 1);
  const double want = 1.0 / (f(0, 0) - fnb.dot(fnn.ldlt().solve(fnb)));
  CHECK(crlb_beta(p, 50)(0) == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("coincident directions give a singular bound") {
  ModelParams p = coherent_truth();
  p.betas << 1.0, 1.0;
  p.source_cov = Mat::Identity(2, 2);
  CHECK_THROWS_AS(crlb_beta(p, 100), SingularMatrixError);
}
