#pragma once

#include <vector>

#include "lanolem/model.hpp"

namespace lanolem {

/// N x d, true marks a missing cell. An empty mask means everything is observed.
using MissingMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline bool is_missing(const MissingMask& mask, Eigen::Index t, Eigen::Index i) {
  return mask.size() != 0 && mask(t, i);
}

/// Output of the extended Kalman filter. Index t covers time steps 1..N (0-based).
struct ForwardPass {
  std::vector<Vector> predicted_mean;  // mu_hat(t)
  std::vector<Matrix> predicted_cov;   // P_hat(t)
  std::vector<Vector> filtered_mean;   // mu(t)
  std::vector<Matrix> filtered_cov;    // P(t)
  std::vector<Matrix> innovation_cov;  // U(t), d x d; zero rows/cols for missing dimensions
  std::vector<Matrix> gain;            // K(t), k x d; zero columns for missing dimensions
  std::vector<Matrix> jacobian;        // J evaluated at the previous filtered mean (or prior mean for t = 0)
  double log_likelihood = 0.0;         // sum of Gaussian innovation log densities
  double max_asymmetry = 0.0;          // largest relative |P - P^T| seen before symmetrization

  int size() const noexcept { return static_cast<int>(filtered_mean.size()); }
};

struct SmoothedTrajectory {
  std::vector<Vector> mean;  // s_hat(t)
  std::vector<Matrix> cov;   // W(t)
  std::vector<Matrix> gain;  // V(t), t < N - 1

  int size() const noexcept { return static_cast<int>(mean.size()); }
};

/// How the outer-product moments involving s_phi are formed.
enum class MomentMode {
  /// E[s_phi s_phi^T] = E[s_phi] E[s_phi]^T and E[s(t+1) s_phi^T] = E[s(t+1)] E[s_phi]^T, everywhere.
  approximate,
  /// As above, but the linear (s) sub-blocks use the exact smoothed second moments.
  exact_linear_block,
};

/// Sufficient statistics consumed by the learning step.
struct MomentSet {
  std::vector<Vector> s;          // E[s(t)]
  std::vector<Matrix> ss;         // E[s(t) s(t)^T]
  std::vector<Matrix> next_s;     // E[s(t+1) s(t)^T], t < N - 1
  std::vector<Vector> sphi;       // E[[s(t); phi(s(t))]]
  std::vector<Matrix> sphi_sphi;  // E[s_phi(t) s_phi(t)^T]
  std::vector<Matrix> next_sphi;  // E[s(t+1) s_phi(t)^T], t < N - 1

  int size() const noexcept { return static_cast<int>(s.size()); }
};

/// Extended Kalman filter over X (N x d). The prior N(prior_mean, prior_cov) is on s(0);
/// the first prediction yields s(1), which is then updated with the first row of X.
/// Missing dimensions are dropped from the update; a fully missing row keeps the prediction.
ForwardPass ekf_forward(const ModelParams& theta, const Eigen::Ref<const Matrix>& X, const MissingMask& mask,
                        const Eigen::Ref<const Vector>& prior_mean, const Eigen::Ref<const Matrix>& prior_cov);

SmoothedTrajectory rts_backward(const ModelParams& theta, const ForwardPass& fwd);

MomentSet compute_moments(const SmoothedTrajectory& smoothed, const PolyBasis& basis,
                          MomentMode mode = MomentMode::approximate);

}  // namespace lanolem
