#include "doa/stochastic_model.hpp"

#include <cmath>
#include <string>

#include "doa/rng.hpp"

namespace doa {

void check_noise(const RVec& delta) {
  if (delta.size() < 1) throw DomainError("noise variance vector is empty");
  for (Index w = 0; w < delta.size(); ++w) {
    if (!(std::isfinite(delta(w)) && delta(w) > 0.0)) {
      throw DomainError("noise variance delta[" + std::to_string(w) + "] must be > 0");
    }
  }
}

void check_source_cov(const Mat& o, double rel_tol) {
  if (o.rows() != o.cols() || o.rows() < 1) throw DomainError("source covariance must be square and non-empty");
  if (!o.allFinite()) throw DomainError("source covariance has non-finite entries");
  if (!is_hermitian(o)) throw DomainError("source covariance is not Hermitian");
  if (!is_psd(o, rel_tol)) throw DomainError("source covariance is not positive semi-definite");
}

void Scenario::validate() const {
  check_angles(betas);
  if (sensors < 2) throw DomainError("need at least two sensors");
  if (betas.size() >= sensors) throw DomainError("number of sources must be smaller than number of sensors");
  if (source_cov.rows() != betas.size()) throw DomainError("source covariance size does not match number of sources");
  check_source_cov(source_cov);
  if (noise.size() != sensors) throw DomainError("noise variance length does not match sensor count");
  check_noise(noise);
}

Mat psd_sqrt(const Mat& o) {
  if (o.rows() != o.cols()) throw DomainError("psd_sqrt needs a square matrix");
  if (o.size() == 0) return Mat();
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(o));
  RVec ev = es.eigenvalues();
  const double norm = ev.cwiseAbs().maxCoeff();
  if (ev(0) < -1e-10 * norm) throw DomainError("matrix is not positive semi-definite");
  for (Index i = 0; i < ev.size(); ++i) ev(i) = ev(i) > 0.0 ? std::sqrt(ev(i)) : 0.0;
  return es.eigenvectors() * ev.asDiagonal();
}

namespace {

// Draws snapshot columns one at a time in a fixed order so that the full and
// the covariance-only simulators consume the stream identically.
class SnapshotSource {
 public:
  SnapshotSource(const Scenario& s, std::uint64_t seed)
      : mix_(manifold(s.betas, s.sensors) * psd_sqrt(s.source_cov)),
        noise_std_(s.noise.cwiseSqrt()),
        rng_(seed),
        zk_(s.sources()) {}

  void next(Eigen::Ref<CVec> r) {
    for (Index v = 0; v < zk_.size(); ++v) zk_(v) = rng_.complex_normal();
    r.noalias() = mix_ * zk_;
    for (Index w = 0; w < r.size(); ++w) r(w) += noise_std_(w) * rng_.complex_normal();
  }

 private:
  Mat mix_;
  RVec noise_std_;
  Rng rng_;
  CVec zk_;
};

}  // namespace

SnapshotMatrix sample_snapshots(const Scenario& scenario, Index count, std::uint64_t seed) {
  scenario.validate();
  if (count < 1) throw DomainError("snapshot count must be >= 1");
  SnapshotSource src(scenario, seed);
  SnapshotMatrix out{Mat(scenario.sensors, count), seed};
  CVec r(scenario.sensors);
  for (Index t = 0; t < count; ++t) {
    src.next(r);
    out.data.col(t) = r;
  }
  return out;
}

SampleCovariance sample_covariance(const SnapshotMatrix& snapshots) {
  const Index count = snapshots.count();
  if (count < 1) throw DomainError("sample covariance needs at least one snapshot");
  Mat r = snapshots.data * snapshots.data.adjoint() / static_cast<double>(count);
  return {hermitian_part(r), count};
}

SampleCovariance simulate_covariance(const Scenario& scenario, Index count, std::uint64_t seed) {
  scenario.validate();
  if (count < 1) throw DomainError("snapshot count must be >= 1");
  SnapshotSource src(scenario, seed);
  const Index w = scenario.sensors;
  Mat acc = Mat::Zero(w, w);
  CVec r(w);
  for (Index t = 0; t < count; ++t) {
    src.next(r);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(r);
  }
  Mat full = acc.selfadjointView<Eigen::Lower>();
  return {full / static_cast<double>(count), count};
}

Mat model_covariance(const RVec& betas, const Mat& source_cov, const RVec& delta) {
  check_noise(delta);
  if (source_cov.rows() != betas.size() || source_cov.cols() != betas.size()) {
    throw DomainError("source covariance size does not match number of sources");
  }
  const Mat a = manifold(betas, delta.size());
  Mat g = a * source_cov * a.adjoint();
  g.diagonal().real() += delta;
  g = hermitian_part(g);
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw SingularMatrixError("model covariance is not positive definite");
  return g;
}

}  // namespace doa
