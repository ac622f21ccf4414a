#include <doctest.h>

#include "doa/array_geometry.hpp"
#include "test_support.hpp"

using namespace doa;
using doa::testing::rel_err;

namespace {
const cplx J(0.0, 1.0);
}

TEST_CASE("steering vector at broadside is all ones") {
  const CVec a = steering_vector(kPi / 2, 4);
  for (Index w = 0; w < 4; ++w) CHECK(std::abs(a(w) - cplx(1.0, 0.0)) < 1e-15);
}

TEST_CASE("steering vector at 60 degrees cycles through the fourth roots of unity") {
  const CVec a = steering_vector(kPi / 3, 4);
  const cplx want[] = {1.0, -J, -1.0, J};
  for (Index w = 0; w < 4; ++w) CHECK(std::abs(a(w) - want[w]) < 1e-14);
}

TEST_CASE("steering element matches a high-precision evaluation") {
  // exp(-j pi cos 50deg), 30-digit mpmath.
  const cplx want(-0.433686916714649613354566211477, -0.901063626094484278853622364308);
  const CVec a = steering_vector(deg2rad(50.0), 6);
  CHECK(a(0) == cplx(1.0, 0.0));
  CHECK(std::abs(a(1) - want) < 1e-14);
}

TEST_CASE("steering derivative closed forms") {
  const CVec d = steering_derivative(kPi / 2, 4);
  for (Index w = 0; w < 4; ++w) CHECK(std::abs(d(w) - J * kPi * static_cast<double>(w)) < 1e-14);

  const CVec d2 = steering_derivative(kPi / 3, 2);
  CHECK(std::abs(d2(0)) < 1e-15);
  CHECK(std::abs(d2(1) - cplx(kPi * std::sqrt(3.0) / 2.0, 0.0)) < 1e-14);
}

TEST_CASE("steering derivative agrees with finite differences") {
  Rng rng(11);
  const double h = 1e-7;
  for (int trial = 0; trial < 100; ++trial) {
    const double beta = rng.uniform(0.05, kPi - 0.05);
    const Index w = rng.uniform_int(1, 16);
    const CVec fd = (steering_vector(beta + h, w) - steering_vector(beta - h, w)) / (2.0 * h);
    const CVec d = steering_derivative(beta, w);
    if (w == 1) {
      CHECK(d.norm() == 0.0);
    } else {
      CHECK((fd - d).norm() / d.norm() <= 1e-6);
    }
  }
}

TEST_CASE("unit modulus and reflection symmetry") {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const double beta = rng.uniform(0.01, kPi - 0.01);
    const Index w = rng.uniform_int(1, 32);
    const CVec a = steering_vector(beta, w);
    const CVec b = steering_vector(kPi - beta, w);
    for (Index k = 0; k < w; ++k) {
      CHECK(std::abs(std::abs(a(k)) - 1.0) <= 1e-12);
      CHECK(std::abs(b(k) - std::conj(a(k))) <= 1e-12);
    }
  }
}

TEST_CASE("manifold columns") {
  const Mat a = manifold(RVec::Constant(1, kPi / 2), 3);
  CHECK(a.rows() == 3);
  CHECK(a.cols() == 1);
  CHECK((a - Mat::Ones(3, 1)).norm() < 1e-15);

  RVec b(2);
  b << kPi / 3, kPi / 2;
  const Mat m = manifold(b, 2);
  Mat want(2, 2);
  want << 1.0, 1.0, -J, 1.0;
  CHECK((m - want).norm() < 1e-15);

  RVec dup(2);
  dup << kPi / 4, kPi / 4;
  const Mat d = manifold(dup, 6);
  Eigen::FullPivLU<Mat> lu(d);
  CHECK(lu.rank() == 1);
}

TEST_CASE("endfire and invalid sizes are rejected") {
  CHECK_THROWS_AS(steering_vector(0.0, 4), DomainError);
  CHECK_THROWS_AS(steering_vector(kPi, 4), DomainError);
  CHECK_THROWS_AS(steering_vector(-0.1, 4), DomainError);
  CHECK_THROWS_AS(steering_vector(std::nan(""), 4), DomainError);
  CHECK_THROWS_AS(steering_vector(1.0, 0), DomainError);
  CHECK_THROWS_AS(steering_derivative(kPi, 4), DomainError);
  RVec b(2);
  b << 0.5, kPi;
  CHECK_THROWS_AS(manifold(b, 4), DomainError);
  CHECK_THROWS_AS(manifold(RVec(), 4), DomainError);
}
