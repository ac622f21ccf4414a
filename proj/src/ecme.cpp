#include "doa/ecme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "doa/array_geometry.hpp"

namespace doa {

void EcmeOptions::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("solver." + field + ": " + why);
  };
  if (max_iters < 1) fail("max_iters", "must be >= 1");
  if (!(beta_tol > 0.0)) fail("beta_tol", "must be > 0");
  if (!(grad_tol > 0.0)) fail("grad_tol", "must be > 0");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) fail("armijo_c", "must lie in (0, 1)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) fail("backtrack_factor", "must lie in (0, 1)");
  if (!(boundary_fraction > 0.0 && boundary_fraction <= 1.0)) fail("boundary_fraction", "must lie in (0, 1]");
  if (max_descent_steps < 1) fail("max_descent_steps", "must be >= 1");
  if (max_backtracks < 1) fail("max_backtracks", "must be >= 1");
  if (!(max_condition > 1.0)) fail("max_condition", "must be > 1");
}

const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::beta_tol:
      return "beta_tol";
    case StopReason::max_iters:
      return "max_iters";
  }
  return "unknown";
}

ConditionalMoments e_step(const ModelParams& prev, const Mat& r_hat, double max_condition) {
  const Index w = prev.sensors();
  const Index v = prev.sources();
  if (r_hat.rows() != w || r_hat.cols() != w) throw DomainError("sample covariance size does not match sensor count");
  const Mat a = manifold(prev.betas, w);
  const Mat& o = prev.source_cov;
  Mat g = a * o * a.adjoint();
  g.diagonal().real() += prev.noise;
  g = hermitian_part(g);
  if (hermitian_condition(g) > max_condition) throw SingularMatrixError("model covariance condition number exceeds limit");
  const PdFactor chol(g, std::numeric_limits<double>::infinity(), "model covariance");

  // Gain H = G^{-1} A O.
  const Mat h = chol.solve(a * o);
  // O - H^H G H, evaluated as (O A~^H A~ + I)^{-1} O so that null vectors of O
  // stay null vectors of the posterior covariance.
  const RVec inv_noise = prev.noise.cwiseInverse();
  const Mat gram = a.adjoint() * inv_noise.asDiagonal() * a;
  const Mat posterior = Eigen::FullPivLU<Mat>(o * gram + Mat::Identity(v, v)).solve(o);

  ConditionalMoments out;
  out.source = hermitian_part(h.adjoint() * r_hat * h + posterior);

  // N_j = Q G^{-1} R G^{-1} Q + Q - Q G^{-1} Q
  const Mat q = prev.noise.asDiagonal().toDenseMatrix().cast<cplx>();
  const Mat ginv_q = chol.solve(q);
  Mat nj = ginv_q.adjoint() * r_hat * ginv_q + q - q * ginv_q;
  out.noise = hermitian_part(nj);
  return out;
}

std::pair<Mat, RVec> m_step(const ConditionalMoments& moments, const RVec& prev_delta, int* halvings) {
  if (moments.noise.rows() != prev_delta.size()) throw DomainError("noise moment size does not match noise vector");
  RVec delta(prev_delta.size());
  for (Index w = 0; w < delta.size(); ++w) {
    const double d = moments.noise(w, w).real();
    if (d > 0.0) {
      delta(w) = d;
    } else {
      delta(w) = prev_delta(w) / 2.0;
      if (halvings) ++*halvings;
    }
  }
  return {hermitian_part(moments.source), delta};
}

DescentReport cm_step(const RVec& prev_betas, const Mat& source_cov, const RVec& delta, const Mat& r_hat,
                      const EcmeOptions& opts) {
  check_angles(prev_betas);
  const DirectionObjective objective(source_cov, delta, r_hat);
  const Index v = prev_betas.size();

  DescentReport rep;
  rep.betas = prev_betas;
  RVec grad;
  double f = objective.value_and_gradient(rep.betas, grad);

  auto trial_value = [&](const RVec& b) {
    for (Index i = 0; i < b.size(); ++i) {
      if (!valid_angle(b(i))) return std::numeric_limits<double>::infinity();
    }
    try {
      return objective.value(b);
    } catch (const SingularMatrixError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  while (grad.norm() > opts.grad_tol) {
    if (rep.steps >= opts.max_descent_steps) {
      rep.cap_hit = true;
      break;
    }
    // Largest step keeping each coordinate inside (0, pi); flat coordinates
    // impose no limit.
    double t_max = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < v; ++i) {
      if (grad(i) < 0.0) {
        t_max = std::min(t_max, -(kPi - rep.betas(i)) / grad(i));
      } else if (grad(i) > 0.0) {
        t_max = std::min(t_max, rep.betas(i) / grad(i));
      }
    }
    double t = opts.boundary_fraction * t_max;
    const double g2 = grad.squaredNorm();

    bool accepted = false;
    RVec cand;
    double f_cand = 0.0;
    for (int k = 0; k <= opts.max_backtracks; ++k) {
      cand = rep.betas - t * grad;
      f_cand = trial_value(cand);
      if (f_cand <= f - opts.armijo_c * t * g2) {
        accepted = true;
        break;
      }
      t *= opts.backtrack_factor;
    }
    if (!accepted) {
      rep.cap_hit = true;
      break;
    }
    rep.betas = cand;
    f = objective.value_and_gradient(rep.betas, grad);
    ++rep.steps;
  }
  rep.gradient_norm = grad.norm();
  return rep;
}

ModelParams canonicalize(const ModelParams& p) {
  const Index v = p.sources();
  std::vector<Index> order(static_cast<std::size_t>(v));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return p.betas(a) < p.betas(b); });
  ModelParams out{RVec(v), Mat(v, v), p.noise};
  for (Index i = 0; i < v; ++i) {
    out.betas(i) = p.betas(order[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < v; ++j) {
      out.source_cov(i, j) = p.source_cov(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

EcmeResult run_ecme(const SampleCovariance& r_hat, const ModelParams& init, const EcmeOptions& opts) {
  opts.validate();
  init.validate();
  if (r_hat.matrix.rows() != init.sensors() || r_hat.matrix.cols() != init.sensors()) {
    throw DomainError("sample covariance size does not match sensor count");
  }
  if (r_hat.snapshots < 1) throw DomainError("sample covariance must come from at least one snapshot");

  EcmeResult res;
  ModelParams cur = init;
  try {
    if (opts.llf_trace) res.llf_trace.push_back(log_likelihood(r_hat, cur));
  } catch (const std::exception& e) {
    throw EcmeError(0, e.what());
  }
  if (opts.record_history) res.history.push_back(cur);

  for (int d = 1; d <= opts.max_iters; ++d) {
    ModelParams next;
    try {
      const ConditionalMoments moments = e_step(cur, r_hat.matrix, opts.max_condition);
      auto [o, delta] = m_step(moments, cur.noise, &res.noise_floor_events);
      const DescentReport rep = cm_step(cur.betas, o, delta, r_hat.matrix, opts);
      if (rep.cap_hit) ++res.descent_cap_hits;
      next = ModelParams{rep.betas, std::move(o), std::move(delta)};
      if (opts.llf_trace) res.llf_trace.push_back(log_likelihood(r_hat, next));
    } catch (const SingularMatrixError& e) {
      throw EcmeError(d, e.what());
    } catch (const DomainError& e) {
      throw EcmeError(d, e.what());
    }
    const double moved = (next.betas - cur.betas).norm();
    cur = std::move(next);
    res.iterations = d;
    if (opts.record_history) res.history.push_back(cur);
    if (moved <= opts.beta_tol) {
      res.converged = true;
      res.stop_reason = StopReason::beta_tol;
      break;
    }
  }
  res.params = canonicalize(cur);
  return res;
}

namespace {

struct GridBest {
  double value = std::numeric_limits<double>::infinity();
  std::vector<int> index;
};

// Enumerates ascending index tuples whose first entry is `first`, in
// lexicographic order, keeping the strict minimum.
void scan_subtree(const Mat& r_hat, Index sources, double step, int last, int first, GridBest& best) {
  std::vector<int> idx(static_cast<std::size_t>(sources));
  idx[0] = first;
  for (Index i = 1; i < sources; ++i) idx[static_cast<std::size_t>(i)] = first + static_cast<int>(i);
  if (idx.back() > last) return;
  RVec betas(sources);
  while (true) {
    for (Index i = 0; i < sources; ++i) betas(i) = step * idx[static_cast<std::size_t>(i)];
    try {
      const double val = uniform_concentrated_objective(betas, r_hat).value;
      if (val < best.value) {
        best.value = val;
        best.index = idx;
      }
    } catch (const DomainError&) {
    } catch (const SingularMatrixError&) {
    }
    // Next ascending tuple with idx[0] fixed.
    Index pos = sources - 1;
    while (pos >= 1 && idx[static_cast<std::size_t>(pos)] == last - static_cast<int>(sources - 1 - pos)) --pos;
    if (pos < 1) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (Index i = pos + 1; i < sources; ++i) {
      idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
    }
  }
}

int last_grid_index(double step) {
  int last = static_cast<int>(std::floor(kPi / step));
  while (last > 0 && !(step * last < kPi)) --last;
  return last;
}

void check_grid_args(const Mat& r_hat, Index sources, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("grid step must be > 0");
  if (sources < 1) throw DomainError("need at least one source");
  if (r_hat.rows() != r_hat.cols() || sources >= r_hat.rows()) {
    throw DomainError("grid search needs fewer sources than sensors");
  }
}

RVec finish_grid(const std::vector<GridBest>& per_first, double step) {
  const GridBest* best = nullptr;
  for (const auto& b : per_first) {
    if (!b.index.empty() && (best == nullptr || b.value < best->value)) best = &b;
  }
  if (best == nullptr) throw DomainError("no grid point gave a positive residual noise estimate");
  RVec out(static_cast<Index>(best->index.size()));
  for (Index i = 0; i < out.size(); ++i) out(i) = step * best->index[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace

RVec grid_initializer(const Mat& r_hat, Index sources, double grid_step) {
  check_grid_args(r_hat, sources, grid_step);
  const int last = last_grid_index(grid_step);
  std::vector<GridBest> per_first(static_cast<std::size_t>(std::max(last, 0)));
#pragma omp parallel for schedule(dynamic)
  for (int first = 1; first <= last; ++first) {
    scan_subtree(r_hat, sources, grid_step, last, first, per_first[static_cast<std::size_t>(first - 1)]);
  }
  return finish_grid(per_first, grid_step);
}

RVec grid_initializer_serial(const Mat& r_hat, Index sources, double grid_step) {
  check_grid_args(r_hat, sources, grid_step);
  const int last = last_grid_index(grid_step);
  GridBest best;
  for (int first = 1; first <= last; ++first) scan_subtree(r_hat, sources, grid_step, last, first, best);
  return finish_grid({best}, grid_step);
}

}  // namespace doa
