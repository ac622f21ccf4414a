#pragma once

// ECME iteration for stochastic ML direction finding in nonuniform noise.
//
// Each outer iteration d:
//   E-step   conditional second moments N_k, N_j of the latent source and
//            noise sequences given R_hat and the previous parameters;
//   M-step   O <- N_k, delta_w <- [N_j]_{ww} (halved previous value if not
//            positive);
//   CM-step  steepest descent on f(beta) = -J(beta, O, delta)/L with an Armijo
//            backtracking line search whose first trial step stays a fixed
//            fraction of the way to the (0, pi) boundary.
//
// J is non-decreasing across every step and O stays PSD, delta positive.

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "doa/likelihood.hpp"

namespace doa {

struct ConditionalMoments {
  Mat source;  // N_k, V x V
  Mat noise;   // N_j, W x W
};

struct EcmeOptions {
  int max_iters = 500;
  double beta_tol = deg2rad(0.001);
  double grad_tol = 1e-3;
  double armijo_c = 0.3;
  double backtrack_factor = 0.5;
  double boundary_fraction = 0.1;
  int max_descent_steps = 10000;
  int max_backtracks = 60;
  double max_condition = 1e12;
  bool llf_trace = true;
  /// Keep every iterate in EcmeResult::history.
  bool record_history = false;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class StopReason { beta_tol, max_iters };

const char* to_string(StopReason r);

struct DescentReport {
  RVec betas;
  int steps = 0;
  bool cap_hit = false;  // step cap or backtracking cap reached
  double gradient_norm = 0.0;
};

struct EcmeResult {
  ModelParams params;
  std::vector<double> llf_trace;  // J at the initial point, then after every iteration
  std::vector<ModelParams> history;  // initial point then every iterate, if requested
  int iterations = 0;
  bool converged = false;
  StopReason stop_reason = StopReason::max_iters;
  int noise_floor_events = 0;  // M-step halving branch taken
  int descent_cap_hits = 0;
};

/// Raised when an iteration cannot proceed (G not PD or too badly
/// conditioned). `iteration` is the 1-based outer iteration.
class EcmeError : public std::runtime_error {
 public:
  EcmeError(int iteration, const std::string& what)
      : std::runtime_error("ECME iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

ConditionalMoments e_step(const ModelParams& prev, const Mat& r_hat, double max_condition = 1e12);

/// Returns (O, delta); delta_w falls back to prev_delta_w / 2 when [N_j]_{ww}
/// is not positive. `halvings`, if given, counts those fallbacks.
std::pair<Mat, RVec> m_step(const ConditionalMoments& moments, const RVec& prev_delta, int* halvings = nullptr);

DescentReport cm_step(const RVec& prev_betas, const Mat& source_cov, const RVec& delta, const Mat& r_hat,
                      const EcmeOptions& opts);

EcmeResult run_ecme(const SampleCovariance& r_hat, const ModelParams& init, const EcmeOptions& opts = {});

/// Sort directions ascending and permute O rows/columns to match.
ModelParams canonicalize(const ModelParams& p);

/// Coarse V-dimensional grid search of the uniform-noise concentrated
/// objective over strictly ascending tuples of interior grid angles
/// k * grid_step, k = 1, 2, ...  Returns the minimizer, ties going to the
/// lexicographically smallest tuple. Parallelized with OpenMP.
RVec grid_initializer(const Mat& r_hat, Index sources, double grid_step);

/// Single-threaded reference for grid_initializer; same result.
RVec grid_initializer_serial(const Mat& r_hat, Index sources, double grid_step);

}  // namespace doa
