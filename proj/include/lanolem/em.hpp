#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lanolem/learning.hpp"

namespace lanolem {

enum class InitMode { identity_observed, svd, smoothed_regression };

/// Quantity used to pick the returned iterate and to decide convergence.
enum class Tracking {
  /// -(EKF marginal log-likelihood) + elastic-net penalty.
  likelihood,
  /// penalized_objective, i.e. the expected complete-data term plus penalty.
  q_function,
};

struct FitOptions {
  int max_outer_iters = 100;
  double outer_tol = 1e-5;
  Tracking tracking = Tracking::likelihood;
  InitMode init_mode = InitMode::identity_observed;
  std::optional<Vector> prior_mean;  // defaults to zeros
  double prior_cov_scale = 1.0;      // prior covariance = scale * I
  bool prior_from_data = false;      // without prior_mean: center the prior on the first row, mapped back through C
  int smoothing_half_width = 10;     // smoothed_regression init: window of 2h + 1 samples
  int smoothing_order = 3;
  bool scale_states = false;         // smoothed_regression init: C = diag(column RMS) instead of I
  std::uint64_t seed = 0;

  bool freeze_c = false;
  bool linear_only = false;      // F held at zero
  bool center_c_with_u = false;  // regress x - u instead of x when refitting C
  MomentMode moment_mode = MomentMode::approximate;
  SparseSolver solver = SparseSolver::ista;
  int max_inner_iters = 500;
  double inner_tol = 1e-8;

  /// Start from these parameters instead of calling initialize().
  std::optional<ModelParams> initial;

  void validate() const;
};

struct FitReport {
  std::vector<double> objective_trace;  // penalized objective after each inference pass
  std::vector<double> tracked_trace;    // the quantity selected by FitOptions::tracking
  int n_iters = 0;                      // == objective_trace.size()
  int best_iteration = 0;               // argmin of tracked_trace
  bool converged = false;
  ModelParams theta;                // parameters achieving the lowest objective
  SmoothedTrajectory smoothed;      // their smoothed states
  int nonzero_A_minus_I = 0;
  int nonzero_F = 0;
  long inner_iterations = 0;
  double wall_seconds = 0.0;
};

/// Settings used by the benchmarks and the CLI defaults: smoothed-regression start when k == d
/// (svd otherwise), accelerated M-step, prior centered on the first row, C frozen.
FitOptions benchmark_options(int k, int d);

/// Initial parameters. identity_observed (k == d): C = I, u = column means, A = I, F = 0, b = 0,
/// Gamma = R = diag(0.1 * column variances). svd (k <= d): C = leading right singular vectors of
/// the centered data, states projected onto them, Gamma from the projected-state variances.
/// smoothed_regression (k == d): C = I (or diag(column RMS) with scale_states), u = 0,
/// states = locally smoothed data mapped through C^-1,
/// [A | F] and b regressed on those states under the given lambdas, Gamma and R from the residuals.
ModelParams initialize(const Eigen::Ref<const Matrix>& X, const MissingMask& mask, const Hyperparams& hyper,
                       const FitOptions& opts);

/// Alternates inference (EKF + RTS + moments) with learning until the relative change of the
/// tracked quantity drops below outer_tol, and returns the iterate where it was lowest.
FitReport fit(const Eigen::Ref<const Matrix>& X, const MissingMask& mask, const Hyperparams& hyper,
              const FitOptions& opts);

/// Runs `restarts` fits; restart r > 0 perturbs the initial A with seed opts.seed + r.
/// Returns the report with the lowest tracked value.
FitReport fit_restarts(const Eigen::Ref<const Matrix>& X, const MissingMask& mask, const Hyperparams& hyper,
                       const FitOptions& opts, int restarts);

/// Local polynomial (Savitzky-Golay style) smoother applied column by column. Missing cells are
/// excluded from the local fits, so the output is defined everywhere.
Matrix local_polynomial_smooth(const Eigen::Ref<const Matrix>& X, const MissingMask& mask, int half_width, int order);

/// Prior on s(0) implied by the options.
Vector prior_mean_for(const FitOptions& opts, int k);
/// As above, honoring prior_from_data with the given model and data.
Vector prior_mean_for(const FitOptions& opts, const ModelParams& theta, const Eigen::Ref<const Matrix>& X,
                      const MissingMask& mask);
Matrix prior_cov_for(const FitOptions& opts, int k);

}  // namespace lanolem
