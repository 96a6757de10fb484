#include "lanolem/inference.hpp"

#include <cmath>
#include <numbers>

#include "lanolem/errors.hpp"
#include "lanolem/kernels.hpp"

namespace lanolem {
namespace {

constexpr double kRidge = 1e-12;

void symmetrize(Matrix& m) { m = 0.5 * (m + m.transpose()); }

double relative_asymmetry(const Matrix& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

/// Cholesky of an SPD matrix with a single ridge rescue.
Eigen::LLT<Matrix> spd_factor(const Matrix& m, const char* stage, long step) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success) return llt;
  const double scale = std::max(1.0, m.diagonal().cwiseAbs().mean());
  llt.compute(m + kRidge * scale * Matrix::Identity(m.rows(), m.cols()));
  if (llt.info() != Eigen::Success) throw NumericalError(stage, step, "matrix is singular beyond ridge rescue");
  return llt;
}

}  // namespace

ForwardPass ekf_forward(const ModelParams& theta, const Eigen::Ref<const Matrix>& X, const MissingMask& mask,
                        const Eigen::Ref<const Vector>& prior_mean, const Eigen::Ref<const Matrix>& prior_cov) {
  const int n = static_cast<int>(X.rows());
  const int d = theta.d();
  const int k = theta.k();
  if (n < 1) throw InvalidArgument("ekf_forward: empty data");
  if (X.cols() != d) throw InvalidArgument("ekf_forward: data has wrong number of columns");
  if (mask.size() != 0 && (mask.rows() != n || mask.cols() != d)) throw InvalidArgument("ekf_forward: mask shape");
  if (prior_mean.size() != k || prior_cov.rows() != k || prior_cov.cols() != k) {
    throw InvalidArgument("ekf_forward: prior has wrong dimension");
  }

  ForwardPass fwd;
  fwd.predicted_mean.reserve(n);
  fwd.predicted_cov.reserve(n);
  fwd.filtered_mean.reserve(n);
  fwd.filtered_cov.reserve(n);
  fwd.innovation_cov.reserve(n);
  fwd.gain.reserve(n);
  fwd.jacobian.reserve(n);

  Vector mu = prior_mean;
  Matrix P = prior_cov;
  std::vector<int> observed;
  observed.reserve(d);
  const Matrix eye = Matrix::Identity(k, k);

  for (int t = 0; t < n; ++t) {
    Matrix J = transition_jacobian(theta, mu);
    Vector mu_hat = step_mean(theta, mu);
    Matrix P_hat = J * P * J.transpose() + theta.Gamma;
    symmetrize(P_hat);

    observed.clear();
    for (int i = 0; i < d; ++i) {
      if (!is_missing(mask, t, i)) observed.push_back(i);
    }

    Matrix U = Matrix::Zero(d, d);
    Matrix K = Matrix::Zero(k, d);
    if (observed.empty()) {
      mu = mu_hat;
      P = P_hat;
    } else {
      const int m = static_cast<int>(observed.size());
      Matrix Co(m, k);
      Vector innovation(m);
      Matrix Ro(m, m);
      for (int a = 0; a < m; ++a) {
        Co.row(a) = theta.C.row(observed[a]);
        innovation[a] = X(t, observed[a]) - theta.u[observed[a]];
        for (int c = 0; c < m; ++c) Ro(a, c) = theta.R(observed[a], observed[c]);
      }
      innovation -= Co * mu_hat;
      Matrix Uo = Co * P_hat * Co.transpose() + Ro;
      symmetrize(Uo);
      auto llt = spd_factor(Uo, "ekf_forward innovation covariance", t);
      // K = P_hat Co^T Uo^{-1}
      Matrix Ko = llt.solve(Co * P_hat).transpose();
      mu = mu_hat + Ko * innovation;
      P = (eye - Ko * Co) * P_hat;
      fwd.max_asymmetry = std::max(fwd.max_asymmetry, relative_asymmetry(P));
      symmetrize(P);

      const Vector whitened = llt.matrixL().solve(innovation);
      const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
      fwd.log_likelihood -= 0.5 * (whitened.squaredNorm() + log_det + m * std::log(2.0 * std::numbers::pi));

      for (int a = 0; a < m; ++a) {
        K.col(observed[a]) = Ko.col(a);
        for (int c = 0; c < m; ++c) U(observed[a], observed[c]) = Uo(a, c);
      }
    }

    if (!mu.allFinite() || !P.allFinite()) throw NumericalError("ekf_forward", t, "non-finite filter state");

    fwd.jacobian.push_back(std::move(J));
    fwd.predicted_mean.push_back(std::move(mu_hat));
    fwd.predicted_cov.push_back(std::move(P_hat));
    fwd.filtered_mean.push_back(mu);
    fwd.filtered_cov.push_back(P);
    fwd.innovation_cov.push_back(std::move(U));
    fwd.gain.push_back(std::move(K));
  }
  return fwd;
}

SmoothedTrajectory rts_backward(const ModelParams& theta, const ForwardPass& fwd) {
  (void)theta;  // the Jacobians at mu(t) were already evaluated by the forward pass
  const int n = fwd.size();
  if (n < 1) throw InvalidArgument("rts_backward: empty forward pass");

  SmoothedTrajectory out;
  out.mean.resize(n);
  out.cov.resize(n);
  out.gain.resize(n > 0 ? n - 1 : 0);
  out.mean[n - 1] = fwd.filtered_mean[n - 1];
  out.cov[n - 1] = fwd.filtered_cov[n - 1];

  for (int t = n - 2; t >= 0; --t) {
    // J_{mu(t)} is the Jacobian used to predict step t + 1.
    const Matrix& J = fwd.jacobian[t + 1];
    const Matrix& P = fwd.filtered_cov[t];
    const Matrix& P_hat_next = fwd.predicted_cov[t + 1];
    auto llt = spd_factor(P_hat_next, "rts_backward predicted covariance", t + 1);
    // V = P J^T P_hat^{-1}; P_hat symmetric so V^T = P_hat^{-1} J P
    Matrix V = llt.solve(J * P).transpose();
    out.mean[t] = fwd.filtered_mean[t] + V * (out.mean[t + 1] - fwd.predicted_mean[t + 1]);
    Matrix W = P + V * (out.cov[t + 1] - P_hat_next) * V.transpose();
    symmetrize(W);
    if (!out.mean[t].allFinite() || !W.allFinite()) throw NumericalError("rts_backward", t, "non-finite smoothed state");
    out.cov[t] = std::move(W);
    out.gain[t] = std::move(V);
  }
  return out;
}

MomentSet compute_moments(const SmoothedTrajectory& smoothed, const PolyBasis& basis, MomentMode mode) {
  const int n = smoothed.size();
  const int k = basis.k();
  const int p = k + basis.k_phi();
  const int first = basis.first_nonlinear();

  MomentSet m;
  m.s.resize(n);
  m.ss.resize(n);
  m.sphi.resize(n);
  m.sphi_sphi.resize(n);
  m.next_s.resize(n > 0 ? n - 1 : 0);
  m.next_sphi.resize(n > 0 ? n - 1 : 0);

  Vector table(basis.table_size());
  for (int t = 0; t < n; ++t) {
    const Vector& mean = smoothed.mean[t];
    const Matrix& W = smoothed.cov[t];
    m.s[t] = mean;
    m.ss[t] = W + mean * mean.transpose();

    basis.gaussian_table(mean, W, table);
    Vector sphi(p);
    sphi.head(k) = mean;
    sphi.tail(p - k) = table.segment(first, p - k);

    Matrix outer = Matrix::Zero(p, p);
    kernels::rank1_update(std::span<double>(outer.data(), outer.size()),
                          std::span<const double>(sphi.data(), sphi.size()), 1.0);
    if (mode == MomentMode::exact_linear_block) outer.topLeftCorner(k, k) += W;
    m.sphi[t] = std::move(sphi);
    m.sphi_sphi[t] = std::move(outer);
  }

  for (int t = 0; t + 1 < n; ++t) {
    const Matrix cross = smoothed.cov[t + 1] * smoothed.gain[t].transpose();
    m.next_s[t] = cross + smoothed.mean[t + 1] * smoothed.mean[t].transpose();
    Matrix next = smoothed.mean[t + 1] * m.sphi[t].transpose();
    if (mode == MomentMode::exact_linear_block) next.leftCols(k) += cross;
    m.next_sphi[t] = std::move(next);
  }
  return m;
}

}  // namespace lanolem
