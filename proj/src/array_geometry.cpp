#include "doa/array_geometry.hpp"

#include <cmath>
#include <string>

namespace doa {

namespace {

void check_sensors(Index sensors) {
  if (sensors < 1) throw DomainError("sensor count must be >= 1, got " + std::to_string(sensors));
}

void check_angle(double beta) {
  if (!valid_angle(beta)) {
    throw DomainError("direction " + std::to_string(beta) + " rad outside the open interval (0, pi)");
  }
}

}  // namespace

bool valid_angle(double beta) { return std::isfinite(beta) && beta > 0.0 && beta < kPi; }

void check_angles(const RVec& betas) {
  if (betas.size() < 1) throw DomainError("at least one direction is required");
  for (Index v = 0; v < betas.size(); ++v) check_angle(betas(v));
}

CVec steering_vector(double beta, Index sensors) {
  check_angle(beta);
  check_sensors(sensors);
  const double phase = -kPi * std::cos(beta);
  CVec a(sensors);
  a(0) = cplx(1.0, 0.0);
  for (Index w = 1; w < sensors; ++w) a(w) = std::polar(1.0, phase * static_cast<double>(w));
  return a;
}

CVec steering_derivative(double beta, Index sensors) {
  const CVec a = steering_vector(beta, sensors);
  const double s = kPi * std::sin(beta);
  CVec d(sensors);
  for (Index w = 0; w < sensors; ++w) d(w) = cplx(0.0, s * static_cast<double>(w)) * a(w);
  return d;
}

Mat manifold(const RVec& betas, Index sensors) {
  check_angles(betas);
  check_sensors(sensors);
  Mat a(sensors, betas.size());
  for (Index v = 0; v < betas.size(); ++v) a.col(v) = steering_vector(betas(v), sensors);
  return a;
}

Mat manifold_derivative(const RVec& betas, Index sensors) {
  check_angles(betas);
  check_sensors(sensors);
  Mat d(sensors, betas.size());
  for (Index v = 0; v < betas.size(); ++v) d.col(v) = steering_derivative(betas(v), sensors);
  return d;
}

}  // namespace doa
