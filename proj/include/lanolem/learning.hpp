#pragma once

#include <vector>

#include "lanolem/inference.hpp"

namespace lanolem {

enum class SparseSolver {
  /// Proximal gradient with the fixed Lipschitz step; b held at its previous value.
  ista,
  /// Same objective minimized jointly over [A | F] and an unpenalized b, with a diagonal
  /// (per-column) step, Nesterov momentum, and a restart whenever f would rise.
  accelerated,
};

struct SparseFitConfig {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  int max_inner_iters = 500;
  double inner_tol = 1e-8;
  SparseSolver solver = SparseSolver::ista;

  void validate() const;
};

/// Time sums of the moment set. State-side sums run over t = 1..N-1,
/// observation-side sums over t = 1..N (observed rows only).
struct SummedMoments {
  int n = 0;      // N
  Matrix S_pp;    // sum E[s_phi(t) s_phi(t)^T]
  Matrix S_np;    // sum E[s(t+1) s_phi(t)^T]
  Vector S_p;     // sum E[s_phi(t)]
  Vector S_n;     // sum E[s(t+1)]
  Matrix S_nn;    // sum E[s(t+1) s(t+1)^T]
  Matrix xs;      // sum x(t) E[s(t)]^T
  Matrix ss;      // sum E[s(t) s(t)^T]
  Vector x_sum;   // sum x(t)
  Vector s_sum;   // sum E[s(t)]

  static SummedMoments from(const MomentSet& moments, const Eigen::Ref<const Matrix>& X, const MissingMask& mask);

  /// State-side sums restricted to the linear block (drops the phi columns).
  SummedMoments linear_block(int k) const;
};

/// sign(beta) * max(|beta| - tau, 0)
double soft_threshold(double beta, double tau);

/// 1 / (||Gamma^{-1}||_F * ||S_pp||_F + lambda2)
double step_size(const Eigen::Ref<const Matrix>& Gamma, const Eigen::Ref<const Matrix>& S_pp, double lambda2);

/// Gamma^{-1} (Theta S_pp + b S_p^T - S_np) + lambda2 (Theta - I_pad)
Matrix sparse_gradient(const Eigen::Ref<const Matrix>& theta_s, const Eigen::Ref<const Vector>& b,
                       const Eigen::Ref<const Matrix>& Gamma, const SummedMoments& sums, double lambda2,
                       const ShiftTarget& shift);

/// Smooth part g of the sparse objective:
///   1/2 sum_t E[(s(t+1) - Theta s_phi(t) - b)^T Gamma^{-1} (...)] + lambda2/2 ||Theta - I_pad||_F^2
double sparse_smooth_objective(const Eigen::Ref<const Matrix>& theta_s, const Eigen::Ref<const Vector>& b,
                               const Eigen::Ref<const Matrix>& Gamma, const SummedMoments& sums, double lambda2,
                               const ShiftTarget& shift);

/// g + lambda1 ||Theta - I_pad||_1
double sparse_objective(const Eigen::Ref<const Matrix>& theta_s, const Eigen::Ref<const Vector>& b,
                        const Eigen::Ref<const Matrix>& Gamma, const SummedMoments& sums, double lambda1,
                        double lambda2, const ShiftTarget& shift);

struct SparseFitResult {
  Matrix A;
  Matrix F;
  Vector b;  // jointly fitted offset (accelerated solver only; empty otherwise)
  int iterations = 0;
  bool converged = false;
  double step = 0.0;
  std::vector<double> objective_trace;  // f at every iterate, starting with the warm start
  int descent_violations = 0;           // iterations where f rose by more than rounding
  int zero_count = 0;                   // entries where Theta - I_pad is exactly zero
};

/// Minimizes the sparse objective over [A | F], warm-started at theta, with the solver chosen in cfg.
/// With linear_only, F is held at zero and only A is fitted. f is non-increasing for both solvers.
SparseFitResult fit_sparse(const SummedMoments& sums, const ModelParams& theta, const SparseFitConfig& cfg,
                           bool linear_only = false);

struct CFit {
  Matrix C;
  bool ridge_used = false;
};

/// C = (sum x E[s]^T)(sum E[s s^T])^{-1}. With `center_u`, x is replaced by x - u first.
/// Rows with missing cells regress only over their observed time steps.
CFit fit_C(const MomentSet& moments, const SummedMoments& sums, const Eigen::Ref<const Matrix>& X,
           const MissingMask& mask, const Vector* center_u = nullptr);

struct Offsets {
  Vector b;
  Vector u;
};

Offsets fit_offsets(const MomentSet& moments, const SummedMoments& sums, const Eigen::Ref<const Matrix>& X,
                    const MissingMask& mask, const Eigen::Ref<const Matrix>& theta_s_new,
                    const Eigen::Ref<const Matrix>& C_new);

struct Covariances {
  Matrix Gamma;
  Matrix R;
};

/// Gamma and R from the linearized residuals. `updated` supplies the new A, F, b, C, u
/// (and the Jacobian); `previous_R` is used for the conditional covariance of missing cells.
Covariances fit_covariances(const SmoothedTrajectory& smoothed, const MomentSet& moments,
                            const Eigen::Ref<const Matrix>& X, const MissingMask& mask, const ModelParams& updated,
                            const Eigen::Ref<const Matrix>& previous_R);

/// lambda1 ||Theta - I_pad||_1 + lambda2 / 2 ||Theta - I_pad||_F^2
double elastic_net_penalty(const ModelParams& theta, double lambda1, double lambda2);

/// Expected complete-data negative log-likelihood (up to the 2*pi constants) plus the
/// elastic-net penalty about I_pad.
double penalized_objective(const ModelParams& theta, const Eigen::Ref<const Matrix>& X, const MissingMask& mask,
                           const SmoothedTrajectory& smoothed, const SummedMoments& sums, double lambda1,
                           double lambda2);

struct LearnOptions {
  SparseFitConfig sparse;
  bool linear_only = false;
  bool freeze_c = false;
  bool center_c_with_u = false;
};

struct LearnResult {
  ModelParams theta;
  SparseFitResult sparse;
  bool c_ridge_used = false;
};

/// One learning step: [A | F], then C, then b and u, then Gamma and R.
LearnResult learn(const ModelParams& theta, const SmoothedTrajectory& smoothed, const MomentSet& moments,
                  const SummedMoments& sums, const Eigen::Ref<const Matrix>& X, const MissingMask& mask,
                  const LearnOptions& opts);

}  // namespace lanolem
