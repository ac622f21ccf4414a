// Wall-clock comparison of the OpenMP kernels against their serial
// references: the Monte Carlo driver and the grid initializer. Also checks
// that both paths return identical results.

#include <chrono>
#include <cstdio>
#include <sstream>

#include <CLI11.hpp>

#include "doa/harness.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace doa;

namespace {

template <typename Fn>
double timed(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string csv(const MonteCarloResult& r) {
  std::ostringstream os;
  write_rmse_csv(os, r.table);
  write_trials_csv(os, r.trials, false);
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs OpenMP timing"};
  std::string config;
  int trials = 50;
  double grid_step_deg = 1.0;
  app.add_option("--config", config, "Experiment JSON (default: built-in coherent scenario)");
  app.add_option("--trials", trials, "Trials per snapshot count")->capture_default_str();
  app.add_option("--grid-step-deg", grid_step_deg, "Grid spacing for the initializer benchmark")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  ExperimentConfig c;
  if (!config.empty()) {
    c = experiment_from_json(read_json_file(config));
  } else {
    c.scenario.sensors = 6;
    c.scenario.betas = RVec(2);
    c.scenario.betas << deg2rad(50.0), deg2rad(100.0);
    c.scenario.source_cov = Mat::Constant(2, 2, cplx(2.0, 0.0));
    c.scenario.noise = RVec(6);
    c.scenario.noise << 1, 2, 3, 4, 2, 10;
    c.init.fixed_betas = RVec(2);
    c.init.fixed_betas << deg2rad(45.0), deg2rad(95.0);
  }
  c.trials = trials;

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("threads: %d\n", threads);

  MonteCarloResult ser, par;
  const double t_ser = timed([&] { ser = run_montecarlo_serial(c); });
  const double t_par = timed([&] { par = run_montecarlo(c); });
  std::printf("montecarlo  %zu trials  serial %.3f s  parallel %.3f s  speedup %.2f  identical %s\n",
              ser.trials.size(), t_ser, t_par, t_ser / t_par, csv(ser) == csv(par) ? "yes" : "NO");

  const SampleCovariance r = simulate_covariance(c.scenario, 100, 1);
  const Index v = c.scenario.sources();
  RVec g_ser, g_par;
  const double step = deg2rad(grid_step_deg);
  const double tg_ser = timed([&] { g_ser = grid_initializer_serial(r.matrix, v, step); });
  const double tg_par = timed([&] { g_par = grid_initializer(r.matrix, v, step); });
  std::printf("grid        V=%d step %g deg  serial %.3f s  parallel %.3f s  speedup %.2f  identical %s\n",
              static_cast<int>(v), grid_step_deg, tg_ser, tg_par, tg_ser / tg_par, g_ser == g_par ? "yes" : "NO");
  return csv(ser) == csv(par) && g_ser == g_par ? 0 : 1;
}
