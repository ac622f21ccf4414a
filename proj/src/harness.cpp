#include "doa/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "doa/crlb.hpp"
#include "doa/rng.hpp"

namespace doa {

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& field) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(field.empty() ? std::string(key) : field + "." + key, "wrong type");
  }
}

ModelParams truth_params(const Scenario& s) { return {s.betas, s.source_cov, s.noise}; }

ModelParams initial_params(const ExperimentConfig& c, const SampleCovariance& r_hat) {
  const Index v = c.scenario.sources();
  const Index w = c.scenario.sensors;
  RVec betas = c.init.mode == InitSpec::Mode::fixed ? c.init.fixed_betas
                                                     : grid_initializer_serial(r_hat.matrix, v, c.init.grid_step);
  return {betas, Mat::Identity(v, v), RVec::Ones(w)};
}

std::vector<RmseRow> aggregate(const ExperimentConfig& c, const std::vector<TrialRecord>& trials) {
  const RVec truth_deg = c.scenario.betas.unaryExpr([](double b) { return rad2deg(b); });
  const Index v = c.scenario.sources();
  std::vector<RmseRow> table;
  for (std::size_t li = 0; li < c.snapshot_counts.size(); ++li) {
    RmseRow row;
    row.snapshots = c.snapshot_counts[li];
    std::vector<RVec> good;
    for (int k = 0; k < c.trials; ++k) {
      const TrialRecord& t = trials[li * static_cast<std::size_t>(c.trials) + static_cast<std::size_t>(k)];
      ++row.trials;
      if (t.failed) {
        ++row.failures;
      } else {
        good.push_back(t.betas_deg);
      }
    }
    if (good.empty()) {
      row.rmse_deg = RVec::Constant(v, std::numeric_limits<double>::quiet_NaN());
      row.pooled_deg = std::numeric_limits<double>::quiet_NaN();
    } else {
      const RmseStats st = rmse(good, truth_deg);
      row.rmse_deg = st.per_source;
      row.pooled_deg = st.pooled;
    }
    try {
      const RVec var = crlb_beta(truth_params(c.scenario), row.snapshots);
      row.sqrt_crlb_deg = var.cwiseSqrt().unaryExpr([](double b) { return rad2deg(b); });
      row.pooled_sqrt_crlb_deg = rad2deg(std::sqrt(var.mean()));
    } catch (const SingularMatrixError&) {
      row.sqrt_crlb_deg = RVec::Constant(v, std::numeric_limits<double>::quiet_NaN());
      row.pooled_sqrt_crlb_deg = std::numeric_limits<double>::quiet_NaN();
    }
    row.below_bound = row.pooled_deg < 0.8 * row.pooled_sqrt_crlb_deg;
    table.push_back(row);
  }
  return table;
}

}  // namespace

void ExperimentConfig::validate() const {
  try {
    scenario.validate();
  } catch (const DomainError& e) {
    throw ConfigError("scenario", e.what());
  }
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  if (snapshot_counts.empty()) throw ConfigError("L_values", "must be non-empty");
  for (std::size_t i = 0; i < snapshot_counts.size(); ++i) {
    if (snapshot_counts[i] < 1) throw ConfigError("L_values[" + std::to_string(i) + "]", "must be >= 1");
  }
  if (init.mode == InitSpec::Mode::fixed) {
    if (init.fixed_betas.size() != scenario.sources()) {
      throw ConfigError("init.fixed_betas_deg", "fixed mode needs one initial direction per source");
    }
    for (Index v = 0; v < init.fixed_betas.size(); ++v) {
      if (!valid_angle(init.fixed_betas(v))) {
        throw ConfigError("init.fixed_betas_deg[" + std::to_string(v) + "]", "must lie in (0, 180)");
      }
    }
  } else if (!(init.grid_step > 0.0 && init.grid_step < kPi / 2.0)) {
    throw ConfigError("init.grid_step_deg", "must lie in (0, 90)");
  }
  try {
    solver.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    throw ConfigError(msg.substr(0, colon), msg.substr(colon + 2));
  }
}

ExperimentConfig experiment_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("$", "expected a JSON object");
  ExperimentConfig c;
  if (!j.contains("scenario")) throw ConfigError("scenario", "missing");
  c.scenario = scenario_from_json(j.at("scenario"), "scenario");

  if (j.contains("L_values")) {
    const json& ls = j.at("L_values");
    if (!ls.is_array()) throw ConfigError("L_values", "expected a list of integers");
    c.snapshot_counts.clear();
    for (std::size_t i = 0; i < ls.size(); ++i) {
      if (!ls[i].is_number_integer()) throw ConfigError("L_values[" + std::to_string(i) + "]", "expected an integer");
      c.snapshot_counts.push_back(ls[i].get<Index>());
    }
  }
  c.trials = get_or<int>(j, "trials", c.trials, "");
  c.base_seed = get_or<std::uint64_t>(j, "base_seed", c.base_seed, "");
  c.outputs = get_or<std::string>(j, "outputs", c.outputs, "");
  c.record_timing = get_or<bool>(j, "record_timing", c.record_timing, "");

  if (j.contains("init")) {
    const json& in = j.at("init");
    if (!in.is_object()) throw ConfigError("init", "expected an object");
    const auto mode = get_or<std::string>(in, "mode", "fixed", "init");
    if (mode == "fixed") {
      c.init.mode = InitSpec::Mode::fixed;
    } else if (mode == "grid") {
      c.init.mode = InitSpec::Mode::grid;
    } else {
      throw ConfigError("init.mode", "expected 'fixed' or 'grid', got '" + mode + "'");
    }
    if (in.contains("fixed_betas_deg")) {
      const json& fb = in.at("fixed_betas_deg");
      if (!fb.is_array()) throw ConfigError("init.fixed_betas_deg", "expected a list of numbers");
      c.init.fixed_betas.resize(static_cast<Index>(fb.size()));
      for (std::size_t v = 0; v < fb.size(); ++v) {
        if (!fb[v].is_number()) throw ConfigError("init.fixed_betas_deg[" + std::to_string(v) + "]", "expected a number");
        c.init.fixed_betas(static_cast<Index>(v)) = deg2rad(fb[v].get<double>());
      }
    }
    c.init.grid_step = deg2rad(get_or<double>(in, "grid_step_deg", rad2deg(c.init.grid_step), "init"));
  }

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    if (!s.is_object()) throw ConfigError("solver", "expected an object");
    EcmeOptions& o = c.solver;
    o.max_iters = get_or<int>(s, "max_iters", o.max_iters, "solver");
    o.beta_tol = deg2rad(get_or<double>(s, "beta_tol_deg", rad2deg(o.beta_tol), "solver"));
    o.grad_tol = get_or<double>(s, "grad_tol", o.grad_tol, "solver");
    o.armijo_c = get_or<double>(s, "armijo_c", o.armijo_c, "solver");
    o.backtrack_factor = get_or<double>(s, "backtrack_factor", o.backtrack_factor, "solver");
    o.boundary_fraction = get_or<double>(s, "boundary_fraction", o.boundary_fraction, "solver");
    o.max_descent_steps = get_or<int>(s, "max_descent_steps", o.max_descent_steps, "solver");
    o.max_backtracks = get_or<int>(s, "max_backtracks", o.max_backtracks, "solver");
  }
  c.validate();
  return c;
}

json experiment_to_json(const ExperimentConfig& c) {
  std::vector<double> fixed;
  for (Index v = 0; v < c.init.fixed_betas.size(); ++v) fixed.push_back(rad2deg(c.init.fixed_betas(v)));
  json init = {{"mode", c.init.mode == InitSpec::Mode::fixed ? "fixed" : "grid"},
               {"grid_step_deg", rad2deg(c.init.grid_step)}};
  if (!fixed.empty()) init["fixed_betas_deg"] = fixed;
  const EcmeOptions& o = c.solver;
  return {{"scenario", scenario_to_json(c.scenario)},
          {"L_values", c.snapshot_counts},
          {"trials", c.trials},
          {"base_seed", c.base_seed},
          {"init", init},
          {"solver",
           {{"max_iters", o.max_iters},
            {"beta_tol_deg", rad2deg(o.beta_tol)},
            {"grad_tol", o.grad_tol},
            {"armijo_c", o.armijo_c},
            {"backtrack_factor", o.backtrack_factor},
            {"boundary_fraction", o.boundary_fraction},
            {"max_descent_steps", o.max_descent_steps},
            {"max_backtracks", o.max_backtracks}}},
          {"outputs", c.outputs},
          {"record_timing", c.record_timing}};
}

RVec match_to_truth(const RVec& estimate, const RVec& truth) {
  const Index v = truth.size();
  if (estimate.size() != v) throw DomainError("estimate and truth lengths differ");
  std::vector<Index> perm(static_cast<std::size_t>(v));
  std::iota(perm.begin(), perm.end(), Index{0});
  double best = std::numeric_limits<double>::infinity();
  RVec out = estimate;
  do {
    double cost = 0.0;
    for (Index i = 0; i < v; ++i) {
      const double d = estimate(perm[static_cast<std::size_t>(i)]) - truth(i);
      cost += d * d;
    }
    if (cost < best) {
      best = cost;
      for (Index i = 0; i < v; ++i) out(i) = estimate(perm[static_cast<std::size_t>(i)]);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

RmseStats rmse(const std::vector<RVec>& estimates, const RVec& truth) {
  const Index v = truth.size();
  RmseStats out{RVec::Zero(v), 0.0};
  if (estimates.empty()) return out;
  for (const RVec& e : estimates) out.per_source += (match_to_truth(e, truth) - truth).cwiseAbs2();
  const double n = static_cast<double>(estimates.size());
  out.pooled = std::sqrt(out.per_source.sum() / (n * static_cast<double>(v)));
  out.per_source = (out.per_source / n).cwiseSqrt();
  return out;
}

TrialRecord run_trial(const ExperimentConfig& config, std::size_t l_index, int trial_index) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  TrialRecord rec;
  rec.trial_index = trial_index;
  rec.snapshots = config.snapshot_counts.at(l_index);
  rec.seed = derive_seed(config.base_seed, {static_cast<std::uint64_t>(l_index), static_cast<std::uint64_t>(trial_index)});
  const Index v = config.scenario.sources();
  const RVec truth_deg = config.scenario.betas.unaryExpr([](double b) { return rad2deg(b); });
  try {
    const SampleCovariance r_hat = simulate_covariance(config.scenario, rec.snapshots, rec.seed);
    EcmeOptions opts = config.solver;
    opts.record_history = false;
    const EcmeResult res = run_ecme(r_hat, initial_params(config, r_hat), opts);
    rec.iterations = res.iterations;
    rec.converged = res.converged;
    rec.failed = !res.converged;
    if (!res.converged) rec.error = "iteration cap reached";
    rec.final_llf = res.llf_trace.empty() ? log_likelihood(r_hat, res.params) : res.llf_trace.back();
    rec.betas_deg = res.params.betas.unaryExpr([](double b) { return rad2deg(b); });
    rec.errors_deg = match_to_truth(rec.betas_deg, truth_deg) - truth_deg;
  } catch (const std::exception& e) {
    rec.failed = true;
    rec.error = e.what();
    rec.betas_deg = RVec::Constant(v, std::numeric_limits<double>::quiet_NaN());
    rec.errors_deg = RVec::Constant(v, std::numeric_limits<double>::quiet_NaN());
    rec.final_llf = std::numeric_limits<double>::quiet_NaN();
  }
  rec.wall_time = std::chrono::duration<double>(clock::now() - start).count();
  return rec;
}

MonteCarloResult run_montecarlo(const ExperimentConfig& config) {
  config.validate();
  const long long per_l = config.trials;
  const long long total = per_l * static_cast<long long>(config.snapshot_counts.size());
  MonteCarloResult out;
  out.trials.resize(static_cast<std::size_t>(total));
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < total; ++i) {
    out.trials[static_cast<std::size_t>(i)] =
        run_trial(config, static_cast<std::size_t>(i / per_l), static_cast<int>(i % per_l));
  }
  out.table = aggregate(config, out.trials);
  return out;
}

MonteCarloResult run_montecarlo_serial(const ExperimentConfig& config) {
  config.validate();
  MonteCarloResult out;
  for (std::size_t li = 0; li < config.snapshot_counts.size(); ++li) {
    for (int k = 0; k < config.trials; ++k) out.trials.push_back(run_trial(config, li, k));
  }
  out.table = aggregate(config, out.trials);
  return out;
}

void write_rmse_csv(std::ostream& os, const std::vector<RmseRow>& table) {
  os << "L,src,rmse_deg,sqrt_crlb_deg,trials,failures\n";
  for (const RmseRow& r : table) {
    for (Index v = 0; v < r.rmse_deg.size(); ++v) {
      os << r.snapshots << ',' << (v + 1) << ',' << format_double(r.rmse_deg(v)) << ','
         << format_double(r.sqrt_crlb_deg(v)) << ',' << r.trials << ',' << r.failures << '\n';
    }
    os << r.snapshots << ",all," << format_double(r.pooled_deg) << ',' << format_double(r.pooled_sqrt_crlb_deg) << ','
       << r.trials << ',' << r.failures << '\n';
  }
}

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& trials, bool with_timing) {
  os << "L,trial,seed,src,beta_deg,error_deg,iterations,converged,failed,final_llf";
  if (with_timing) os << ",wall_time_s";
  os << '\n';
  for (const TrialRecord& t : trials) {
    for (Index v = 0; v < t.betas_deg.size(); ++v) {
      os << t.snapshots << ',' << t.trial_index << ',' << t.seed << ',' << (v + 1) << ',' << format_double(t.betas_deg(v))
         << ',' << format_double(t.errors_deg(v)) << ',' << t.iterations << ',' << (t.converged ? 1 : 0) << ','
         << (t.failed ? 1 : 0) << ',' << format_double(t.final_llf);
      if (with_timing) os << ',' << format_double(t.wall_time);
      os << '\n';
    }
  }
}

void write_crlb_csv(std::ostream& os, const Scenario& s, const std::vector<Index>& snapshot_counts) {
  os << "L,src,sqrt_crlb_deg\n";
  for (Index l : snapshot_counts) {
    const RVec b = crlb_beta_deg(truth_params(s), l);
    for (Index v = 0; v < b.size(); ++v) os << l << ',' << (v + 1) << ',' << format_double(b(v)) << '\n';
  }
}

}  // namespace doa
