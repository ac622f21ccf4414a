#pragma once

// Monte Carlo driver: for every snapshot count L and trial, simulate a sample
// covariance from the scenario, initialize, run ECME and score the estimate
// against the truth; aggregate RMSE per source and pooled next to the CRLB.
//
// Trial (l, k) draws from the stream derive_seed(base_seed, {l, k}), so the
// output depends only on the configuration, never on the thread count or
// scheduling. run_montecarlo distributes trials with OpenMP;
// run_montecarlo_serial is the single-threaded reference.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "doa/ecme.hpp"
#include "doa/io.hpp"
#include "doa/stochastic_model.hpp"

namespace doa {

struct InitSpec {
  enum class Mode { fixed, grid };
  Mode mode = Mode::fixed;
  RVec fixed_betas;  // radians, required in fixed mode
  double grid_step = deg2rad(1.0);
};

struct ExperimentConfig {
  Scenario scenario;
  std::vector<Index> snapshot_counts{50, 100, 500};
  int trials = 200;
  std::uint64_t base_seed = 1;
  InitSpec init;
  EcmeOptions solver;
  std::string outputs = "results";
  bool record_timing = false;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses an experiment document; see docs/config.md for the schema.
ExperimentConfig experiment_from_json(const json& j);
json experiment_to_json(const ExperimentConfig& c);

struct TrialRecord {
  int trial_index = 0;
  Index snapshots = 0;
  std::uint64_t seed = 0;
  RVec betas_deg;   // canonical (ascending) estimate
  RVec errors_deg;  // matched estimate minus truth, per true source
  int iterations = 0;
  bool converged = false;
  bool failed = false;  // solver error or iteration cap
  std::string error;
  double final_llf = 0.0;
  double wall_time = 0.0;  // seconds
};

struct RmseRow {
  Index snapshots = 0;
  RVec rmse_deg;        // per source
  double pooled_deg = 0.0;
  RVec sqrt_crlb_deg;   // per source; NaN if the bound is singular
  double pooled_sqrt_crlb_deg = 0.0;
  int trials = 0;
  int failures = 0;
  /// RMSE below 0.8 * sqrt(CRLB): points at a bound or simulation bug.
  bool below_bound = false;
};

struct MonteCarloResult {
  std::vector<RmseRow> table;
  std::vector<TrialRecord> trials;  // ordered by (L index, trial index)
};

struct RmseStats {
  RVec per_source;
  double pooled = 0.0;
};

/// Reorders `estimate` to the permutation closest to `truth` in total squared
/// error.
RVec match_to_truth(const RVec& estimate, const RVec& truth);

/// Per-source and pooled RMSE after per-trial matching. Units are those of
/// the inputs.
RmseStats rmse(const std::vector<RVec>& estimates, const RVec& truth);

/// One trial; never throws for solver failures (they are recorded).
TrialRecord run_trial(const ExperimentConfig& config, std::size_t l_index, int trial_index);

MonteCarloResult run_montecarlo(const ExperimentConfig& config);
MonteCarloResult run_montecarlo_serial(const ExperimentConfig& config);

/// Header: L,src,rmse_deg,sqrt_crlb_deg,trials,failures. One row per source
/// followed by a pooled row with src = all.
void write_rmse_csv(std::ostream& os, const std::vector<RmseRow>& table);
void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& trials, bool with_timing);

/// Header: L,src,sqrt_crlb_deg.
void write_crlb_csv(std::ostream& os, const Scenario& s, const std::vector<Index>& snapshot_counts);

}  // namespace doa
