#pragma once

// Half-wavelength uniform linear array. Sensor w (0-based) sees a plane wave
// from direction beta with phase exp(-j*pi*w*cos(beta)). Angles are radians
// in the open interval (0, pi); endfire is rejected.

#include <stdexcept>

#include "doa/linalg.hpp"

namespace doa {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

bool valid_angle(double beta);

/// Throws DomainError unless every entry lies strictly inside (0, pi) and
/// the vector is non-empty.
void check_angles(const RVec& betas);

CVec steering_vector(double beta, Index sensors);

/// d/dbeta of steering_vector, elementwise.
CVec steering_derivative(double beta, Index sensors);

/// W x V matrix whose v-th column is steering_vector(betas(v), W).
Mat manifold(const RVec& betas, Index sensors);

/// Column v is steering_derivative(betas(v), W).
Mat manifold_derivative(const RVec& betas, Index sensors);

}  // namespace doa
