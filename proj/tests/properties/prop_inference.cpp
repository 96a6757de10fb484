#include <doctest.h>

#include <cmath>

#include "lanolem/inference.hpp"
#include "oracles/lds_oracle.hpp"
#include "oracles/random.hpp"

using namespace lanolem;

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool symmetric_psd(const Matrix& m) {
  if (max_abs(m - m.transpose()) > 1e-14 * std::max(1.0, max_abs(m))) return false;
  return Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues().minCoeff() >= -1e-12 * std::max(1.0, max_abs(m));
}

ModelParams random_nonlinear(oracle::Rng& rng, int k, int d) {
  ModelParams theta = oracle::random_linear_model(rng, k, d, 2);
  theta.A *= 0.8;
  theta.F = rng.matrix(k, theta.k_phi(), 0.005);
  return theta;
}

}  // namespace

TEST_CASE("linear models: EKF and RTS coincide with the textbook filter and smoother") {
  oracle::Rng rng(1201);
  for (int rep = 0; rep < 20; ++rep) {
    const int k = 1 + rep % 4, d = 1 + rep % 3;
    const ModelParams theta = oracle::random_linear_model(rng, k, d);
    const Matrix X = simulate(theta, rng.vector(k), 40, 300 + rep).observations;
    const Vector m0 = rng.vector(k);
    const Matrix P0 = rng.spd(k, 0.5, 2.0);
    const ForwardPass fwd = ekf_forward(theta, X, {}, m0, P0);
    const SmoothedTrajectory sm = rts_backward(theta, fwd);
    const oracle::Lds p{theta.A, theta.C, theta.Gamma, theta.R, theta.b, theta.u};
    const oracle::Filtered of = oracle::kalman(p, X, m0, P0);
    const oracle::Smoothed os = oracle::rts(p, of);
    for (int t = 0; t < X.rows(); ++t) {
      CHECK(max_abs(fwd.predicted_mean[t] - of.m_pred[t]) < 1e-8);
      CHECK(max_abs(fwd.predicted_cov[t] - of.P_pred[t]) < 1e-8);
      CHECK(max_abs(fwd.filtered_mean[t] - of.m[t]) < 1e-8);
      CHECK(max_abs(fwd.filtered_cov[t] - of.P[t]) < 1e-8);
      CHECK(max_abs(sm.mean[t] - os.m[t]) < 1e-8);
      CHECK(max_abs(sm.cov[t] - os.P[t]) < 1e-8);
    }
    CHECK(std::abs(fwd.log_likelihood - of.loglik) < 1e-8 * std::max(1.0, std::abs(of.loglik)));
  }
}

TEST_CASE("covariances stay symmetric PSD and the likelihood stays finite on nonlinear models") {
  oracle::Rng rng(1202);
  for (int rep = 0; rep < 20; ++rep) {
    const int k = 2 + rep % 2, d = 2 + rep % 3;
    const ModelParams theta = random_nonlinear(rng, k, d);
    const Matrix X = simulate(theta, Vector::Zero(k), 60, 400 + rep).observations;
    const ForwardPass fwd = ekf_forward(theta, X, {}, Vector::Zero(k), Matrix::Identity(k, k));
    const SmoothedTrajectory sm = rts_backward(theta, fwd);
    CHECK(std::isfinite(fwd.log_likelihood));
    for (int t = 0; t < fwd.size(); ++t) {
      CHECK(symmetric_psd(fwd.predicted_cov[t]));
      CHECK(symmetric_psd(fwd.filtered_cov[t]));
      CHECK(symmetric_psd(sm.cov[t]));
    }
  }
}

TEST_CASE("masking a dimension with huge R matches excluding it") {
  oracle::Rng rng(1203);
  for (int rep = 0; rep < 10; ++rep) {
    const int k = 2, d = 3;
    ModelParams theta = random_nonlinear(rng, k, d);
    const Matrix X = simulate(theta, Vector::Zero(k), 50, 500 + rep).observations;
    MissingMask mask = MissingMask::Constant(50, d, false);
    mask.col(2).setConstant(true);
    const ForwardPass masked = ekf_forward(theta, X, mask, Vector::Zero(k), Matrix::Identity(k, k));
    ModelParams loud = theta;
    loud.R.row(2).setZero();
    loud.R.col(2).setZero();
    loud.R(2, 2) = 1e12;
    const ForwardPass huge = ekf_forward(loud, X, {}, Vector::Zero(k), Matrix::Identity(k, k));
    for (int t = 0; t < 50; ++t) {
      const Vector& a = masked.filtered_mean[t];
      const Vector& b = huge.filtered_mean[t];
      CHECK((a - b).norm() <= 1e-4 * std::max(1.0, a.norm()));
    }
  }
}
