// doa_ecme: simulate snapshots, estimate directions with ECME, run Monte Carlo
// sweeps and tabulate Cramer-Rao bounds.
//
// Exit status: 0 success, 2 invalid input or configuration, 1 runtime failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "doa/crlb.hpp"
#include "doa/ecme.hpp"
#include "doa/harness.hpp"
#include "doa/io.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace doa;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

std::ofstream open_out(const std::string& path) {
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  return os;
}

template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
  } else {
    auto os = open_out(path);
    fn(os);
  }
}

struct SimulateArgs {
  std::string scenario;
  long long snapshots = 100;
  std::uint64_t seed = 1;
  std::string out;
  std::string covariance_out;
};

int cmd_simulate(const SimulateArgs& a) {
  const Scenario s = scenario_from_json(read_json_file(a.scenario));
  if (a.snapshots < 1) throw ConfigError("--snapshots", "must be >= 1");
  const SnapshotMatrix snaps = sample_snapshots(s, a.snapshots, a.seed);
  with_output(a.out, [&](std::ostream& os) { write_snapshots_csv(os, snaps); });
  if (!a.covariance_out.empty()) {
    with_output(a.covariance_out, [&](std::ostream& os) { write_covariance_csv(os, sample_covariance(snaps).matrix); });
  }
  return 0;
}

struct EstimateArgs {
  std::string snapshots_csv;
  std::string covariance_csv;
  long long num_snapshots = 0;
  std::string init = "fixed";
  std::vector<double> betas_deg;
  int sources = 0;
  double grid_step_deg = 1.0;
  int max_iters = EcmeOptions{}.max_iters;
  double beta_tol_deg = 0.001;
  double grad_tol = EcmeOptions{}.grad_tol;
  std::string out;
};

int cmd_estimate(const EstimateArgs& a) {
  SampleCovariance r_hat;
  if (!a.snapshots_csv.empty() == !a.covariance_csv.empty()) {
    throw ConfigError("input", "give exactly one of --snapshots-csv or --covariance-csv");
  }
  if (!a.snapshots_csv.empty()) {
    std::ifstream in(a.snapshots_csv);
    if (!in) throw ConfigError("--snapshots-csv", "cannot open " + a.snapshots_csv);
    r_hat = sample_covariance(read_snapshots_csv(in));
  } else {
    std::ifstream in(a.covariance_csv);
    if (!in) throw ConfigError("--covariance-csv", "cannot open " + a.covariance_csv);
    if (a.num_snapshots < 1) throw ConfigError("--num-snapshots", "required (>= 1) with --covariance-csv");
    r_hat = {read_covariance_csv(in), a.num_snapshots};
    if (!is_hermitian(r_hat.matrix, 1e-9)) throw ConfigError("--covariance-csv", "matrix is not Hermitian");
    r_hat.matrix = hermitian_part(r_hat.matrix);
  }
  const Index w = r_hat.sensors();

  RVec betas;
  if (a.init == "fixed") {
    if (a.betas_deg.empty()) throw ConfigError("--betas-deg", "required with --init fixed");
    betas.resize(static_cast<Index>(a.betas_deg.size()));
    for (std::size_t i = 0; i < a.betas_deg.size(); ++i) {
      if (!(a.betas_deg[i] > 0.0 && a.betas_deg[i] < 180.0)) {
        throw ConfigError("--betas-deg[" + std::to_string(i) + "]", "must lie in (0, 180)");
      }
      betas(static_cast<Index>(i)) = deg2rad(a.betas_deg[i]);
    }
  } else {
    if (a.sources < 1) throw ConfigError("--sources", "required (>= 1) with --init grid");
    if (!(a.grid_step_deg > 0.0 && a.grid_step_deg < 90.0)) throw ConfigError("--grid-step-deg", "must lie in (0, 90)");
    betas = grid_initializer(r_hat.matrix, a.sources, deg2rad(a.grid_step_deg));
  }
  if (betas.size() >= w) throw ConfigError("--betas-deg", "number of sources must be smaller than the sensor count");

  EcmeOptions opts;
  opts.max_iters = a.max_iters;
  opts.beta_tol = deg2rad(a.beta_tol_deg);
  opts.grad_tol = a.grad_tol;
  try {
    opts.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("solver", e.what());
  }
  const ModelParams init{betas, Mat::Identity(betas.size(), betas.size()), RVec::Ones(w)};
  const EcmeResult res = run_ecme(r_hat, init, opts);

  std::vector<double> out_betas;
  for (Index v = 0; v < res.params.betas.size(); ++v) out_betas.push_back(rad2deg(res.params.betas(v)));
  std::vector<double> delta(res.params.noise.data(), res.params.noise.data() + res.params.noise.size());
  const json j = {{"betas_deg", out_betas},
                  {"source_cov", matrix_to_json(res.params.source_cov)},
                  {"delta", delta},
                  {"llf_trace", res.llf_trace},
                  {"iterations", res.iterations},
                  {"converged", res.converged},
                  {"stop_reason", to_string(res.stop_reason)}};
  with_output(a.out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  return 0;
}

struct MonteCarloArgs {
  std::string config;
  std::string out_dir;
  int trials = 0;
  int threads = 0;
  bool serial = false;
};

int cmd_montecarlo(const MonteCarloArgs& a) {
  json j = read_json_file(a.config);
  if (a.trials > 0) j["trials"] = a.trials;
  if (!a.out_dir.empty()) j["outputs"] = a.out_dir;
  const ExperimentConfig cfg = experiment_from_json(j);
#ifdef _OPENMP
  if (a.threads > 0) omp_set_num_threads(a.threads);
#endif
  const MonteCarloResult res = a.serial ? run_montecarlo_serial(cfg) : run_montecarlo(cfg);
  fs::create_directories(cfg.outputs);
  {
    auto os = open_out((fs::path(cfg.outputs) / "rmse.csv").string());
    write_rmse_csv(os, res.table);
  }
  {
    auto os = open_out((fs::path(cfg.outputs) / "trials.csv").string());
    write_trials_csv(os, res.trials, cfg.record_timing);
  }
  for (const RmseRow& r : res.table) {
    std::cerr << "L=" << r.snapshots << " pooled RMSE " << format_double(r.pooled_deg) << " deg, sqrt(CRLB) "
              << format_double(r.pooled_sqrt_crlb_deg) << " deg, failures " << r.failures << '/' << r.trials << '\n';
    if (r.below_bound) std::cerr << "warning: L=" << r.snapshots << " RMSE is below 0.8 * sqrt(CRLB)\n";
  }
  return 0;
}

struct CrlbArgs {
  std::string scenario;
  std::vector<long long> snapshot_counts;
  std::string out;
};

int cmd_crlb(const CrlbArgs& a) {
  const Scenario s = scenario_from_json(read_json_file(a.scenario));
  std::vector<Index> ls;
  for (std::size_t i = 0; i < a.snapshot_counts.size(); ++i) {
    if (a.snapshot_counts[i] < 1) throw ConfigError("--L[" + std::to_string(i) + "]", "must be >= 1");
    ls.push_back(a.snapshot_counts[i]);
  }
  with_output(a.out, [&](std::ostream& os) { write_crlb_csv(os, s, ls); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic maximum-likelihood DOA estimation in nonuniform noise (ECME)"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Draw snapshots from a scenario and write them as CSV");
  simulate->add_option("--scenario", sim.scenario, "Scenario JSON")->required();
  simulate->add_option("-L,--snapshots", sim.snapshots, "Number of snapshots")->required();
  simulate->add_option("--seed", sim.seed, "RNG seed")->capture_default_str();
  simulate->add_option("-o,--out", sim.out, "Snapshot CSV (stdout if omitted)");
  simulate->add_option("--covariance-out", sim.covariance_out, "Also write the sample covariance CSV");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Run ECME on snapshots or a sample covariance; print JSON");
  estimate->add_option("--snapshots-csv", est.snapshots_csv, "Snapshot CSV (sensor,t,re,im)");
  estimate->add_option("--covariance-csv", est.covariance_csv, "Covariance CSV (row,col,re,im)");
  estimate->add_option("--num-snapshots", est.num_snapshots, "L behind --covariance-csv");
  estimate->add_option("--init", est.init, "Initialization: fixed or grid")
      ->check(CLI::IsMember({"fixed", "grid"}))
      ->capture_default_str();
  estimate->add_option("--betas-deg", est.betas_deg, "Initial directions (fixed init), degrees")->delimiter(',');
  estimate->add_option("--sources", est.sources, "Number of sources (grid init)");
  estimate->add_option("--grid-step-deg", est.grid_step_deg, "Grid spacing, degrees")->capture_default_str();
  estimate->add_option("--max-iters", est.max_iters, "Outer iteration cap")->capture_default_str();
  estimate->add_option("--beta-tol-deg", est.beta_tol_deg, "Outer stop on direction change, degrees")
      ->capture_default_str();
  estimate->add_option("--grad-tol", est.grad_tol, "Direction-step gradient tolerance")->capture_default_str();
  estimate->add_option("-o,--out", est.out, "Result JSON (stdout if omitted)");

  MonteCarloArgs mc;
  auto* montecarlo = app.add_subcommand("montecarlo", "Monte Carlo RMSE sweep; writes rmse.csv and trials.csv");
  montecarlo->add_option("--config", mc.config, "Experiment JSON")->required();
  montecarlo->add_option("--out-dir", mc.out_dir, "Override the config's outputs directory");
  montecarlo->add_option("--trials", mc.trials, "Override the config's trial count");
  montecarlo->add_option("--threads", mc.threads, "OpenMP threads (default: runtime choice)");
  montecarlo->add_flag("--serial", mc.serial, "Use the single-threaded reference driver");

  CrlbArgs cr;
  auto* crlb = app.add_subcommand("crlb", "Tabulate sqrt(CRLB) of the directions, degrees");
  crlb->add_option("--scenario", cr.scenario, "Scenario JSON")->required();
  crlb->add_option("-L,--L", cr.snapshot_counts, "Snapshot counts")->required()->delimiter(',');
  crlb->add_option("-o,--out", cr.out, "CRLB CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(sim);
    if (*estimate) return cmd_estimate(est);
    if (*montecarlo) return cmd_montecarlo(mc);
    if (*crlb) return cmd_crlb(cr);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
