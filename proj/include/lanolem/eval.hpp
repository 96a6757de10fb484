#pragma once

#include <string>
#include <vector>

#include "lanolem/coefficients.hpp"
#include "lanolem/inference.hpp"

namespace lanolem {

/// Continuous-time table of the latent dynamics: [b | A - I | F] / dt.
CoefficientTable discrete_to_continuous(const ModelParams& theta, double dt);

/// Continuous-time field in observed coordinates x = C s + u (requires k == d and C invertible).
/// The latent map is conjugated by the affine change of variables and the resulting polynomial,
/// of the same degree, is recovered exactly by least squares on sample points.
/// With C == I and u == 0 this equals discrete_to_continuous.
CoefficientTable observed_field(const ModelParams& theta, double dt);

/// ||truth - learned||_F / ||truth||_F, after zero-padding both to the larger degree.
double coefficient_error(const CoefficientTable& truth, const CoefficientTable& learned);

struct FilterState {
  Vector mean;
  Matrix cov;
};

/// Filtered state after the last row of X.
FilterState final_filter_state(const ModelParams& theta, const Eigen::Ref<const Matrix>& X, const MissingMask& mask,
                               const Eigen::Ref<const Vector>& prior_mean, const Eigen::Ref<const Matrix>& prior_cov);

/// One-step-ahead predictions C mu_hat(t) + u over `test`, filtering from `start`
/// (each prediction is formed before row t is assimilated).
Matrix one_step_predictions(const ModelParams& theta, const FilterState& start, const Eigen::Ref<const Matrix>& test,
                            const MissingMask& test_mask = {});

/// Mean squared error over the observed cells.
double masked_mse(const Eigen::Ref<const Matrix>& predicted, const Eigen::Ref<const Matrix>& actual,
                  const MissingMask& mask = {});

double one_step_mse(const ModelParams& theta, const FilterState& start, const Eigen::Ref<const Matrix>& test,
                    const MissingMask& test_mask = {});

/// Deterministic rollout of the mean dynamics from `state`, returning C s + u for `horizon` steps.
Matrix forecast(const ModelParams& theta, const Eigen::Ref<const Vector>& state, int horizon);

/// Smoothed reconstruction: observed cells are returned unchanged, masked cells become C s_hat + u.
Matrix interpolate(const ModelParams& theta, const Eigen::Ref<const Matrix>& X, const MissingMask& mask,
                   const Eigen::Ref<const Vector>& prior_mean, const Eigen::Ref<const Matrix>& prior_cov);

/// MSE between reconstruction and reference restricted to the masked cells.
double gap_mse(const Eigen::Ref<const Matrix>& reconstruction, const Eigen::Ref<const Matrix>& reference,
               const MissingMask& mask);

/// Euler step from each previous observation: x_hat(t + 1) = x(t) + dt f(x(t)).
/// `last_train` supplies x(t) for the first test row.
Matrix euler_one_step(const CoefficientTable& field, double dt, const Eigen::Ref<const Vector>& last_train,
                      const Eigen::Ref<const Matrix>& test);

struct EvalRow {
  std::string system;
  double noise_ratio = 0.0;
  unsigned long long seed = 0;
  std::string method;
  double coefficient_error = 0.0;
  double mse = 0.0;
};

std::string eval_csv_header();
std::string to_csv(const EvalRow& row);

}  // namespace lanolem
