#include "lanolem/eval.hpp"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "lanolem/errors.hpp"

namespace lanolem {

CoefficientTable discrete_to_continuous(const ModelParams& theta, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("discrete_to_continuous: dt must be positive");
  const int k = theta.k();
  CoefficientTable out = CoefficientTable::zeros(k, theta.basis.d_phi());
  out.values.col(0) = theta.b / dt;
  out.values.middleCols(1, k) = (theta.A - Matrix::Identity(k, k)) / dt;
  out.values.rightCols(theta.k_phi()) = theta.F / dt;
  return out;
}

CoefficientTable observed_field(const ModelParams& theta, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("observed_field: dt must be positive");
  const int k = theta.k();
  if (theta.d() != k) throw InvalidArgument("observed_field: needs k == d");
  if (theta.C.isIdentity(0.0) && theta.u.isZero(0.0)) return discrete_to_continuous(theta, dt);

  const Eigen::FullPivLU<Matrix> lu(theta.C);
  if (!lu.isInvertible()) throw InvalidArgument("observed_field: C is singular");
  const Matrix c_inv = lu.inverse();

  const int degree = theta.basis.d_phi();
  const auto columns = CoefficientTable::column_exponents(k, degree);
  const int n_cols = static_cast<int>(columns.size());
  // g(x) = (C step(C^-1 (x - u)) + u - x) / dt is a polynomial of the same degree in x, so a
  // least-squares fit on more points than columns recovers it up to rounding.
  const int n_points = 4 * n_cols;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Matrix design(n_points, n_cols);
  Matrix target(n_points, k);
  for (int p = 0; p < n_points; ++p) {
    Vector x(k);
    for (int i = 0; i < k; ++i) x[i] = unit(rng);
    for (int c = 0; c < n_cols; ++c) {
      double v = 1.0;
      for (int i = 0; i < k; ++i)
        for (int e = 0; e < columns[c][i]; ++e) v *= x[i];
      design(p, c) = v;
    }
    const Vector s = c_inv * (x - theta.u);
    target.row(p) = ((theta.C * step_mean(theta, s) + theta.u - x) / dt).transpose();
  }
  CoefficientTable out = CoefficientTable::zeros(k, degree);
  out.values = design.colPivHouseholderQr().solve(target).transpose();
  return out;
}

double coefficient_error(const CoefficientTable& truth, const CoefficientTable& learned) {
  if (truth.dim != learned.dim) throw InvalidArgument("coefficient_error: dimensions differ");
  const int degree = std::max(truth.degree, learned.degree);
  const Matrix t = truth.padded_to(degree).values;
  const double norm = t.norm();
  if (norm == 0.0) throw InvalidArgument("coefficient_error: truth has zero norm");
  return (t - learned.padded_to(degree).values).norm() / norm;
}

FilterState final_filter_state(const ModelParams& theta, const Eigen::Ref<const Matrix>& X, const MissingMask& mask,
                               const Eigen::Ref<const Vector>& prior_mean, const Eigen::Ref<const Matrix>& prior_cov) {
  const ForwardPass fwd = ekf_forward(theta, X, mask, prior_mean, prior_cov);
  return FilterState{fwd.filtered_mean.back(), fwd.filtered_cov.back()};
}

Matrix one_step_predictions(const ModelParams& theta, const FilterState& start, const Eigen::Ref<const Matrix>& test,
                            const MissingMask& test_mask) {
  const ForwardPass fwd = ekf_forward(theta, test, test_mask, start.mean, start.cov);
  Matrix out(test.rows(), test.cols());
  for (int t = 0; t < fwd.size(); ++t) out.row(t) = observe(theta, fwd.predicted_mean[t]).transpose();
  return out;
}

double masked_mse(const Eigen::Ref<const Matrix>& predicted, const Eigen::Ref<const Matrix>& actual,
                  const MissingMask& mask) {
  if (predicted.rows() != actual.rows() || predicted.cols() != actual.cols()) {
    throw InvalidArgument("mse: shapes differ");
  }
  double sum = 0.0;
  long count = 0;
  for (Eigen::Index t = 0; t < actual.rows(); ++t) {
    for (Eigen::Index i = 0; i < actual.cols(); ++i) {
      if (is_missing(mask, t, i)) continue;
      const double e = predicted(t, i) - actual(t, i);
      sum += e * e;
      ++count;
    }
  }
  if (count == 0) throw InvalidArgument("mse: no observed cells");
  return sum / static_cast<double>(count);
}

double one_step_mse(const ModelParams& theta, const FilterState& start, const Eigen::Ref<const Matrix>& test,
                    const MissingMask& test_mask) {
  return masked_mse(one_step_predictions(theta, start, test, test_mask), test, test_mask);
}

Matrix forecast(const ModelParams& theta, const Eigen::Ref<const Vector>& state, int horizon) {
  if (horizon < 0) throw InvalidArgument("forecast: horizon must be >= 0");
  Matrix out(horizon, theta.d());
  Vector s = state;
  for (int h = 0; h < horizon; ++h) {
    s = step_mean(theta, s);
    if (!s.allFinite()) throw NumericalError("forecast", h, "rollout diverged");
    out.row(h) = observe(theta, s).transpose();
  }
  return out;
}

Matrix interpolate(const ModelParams& theta, const Eigen::Ref<const Matrix>& X, const MissingMask& mask,
                   const Eigen::Ref<const Vector>& prior_mean, const Eigen::Ref<const Matrix>& prior_cov) {
  const ForwardPass fwd = ekf_forward(theta, X, mask, prior_mean, prior_cov);
  const SmoothedTrajectory smoothed = rts_backward(theta, fwd);
  Matrix out = X;
  for (int t = 0; t < smoothed.size(); ++t) {
    const Vector fitted = observe(theta, smoothed.mean[t]);
    for (Eigen::Index i = 0; i < X.cols(); ++i) {
      if (is_missing(mask, t, i)) out(t, i) = fitted[i];
    }
  }
  return out;
}

double gap_mse(const Eigen::Ref<const Matrix>& reconstruction, const Eigen::Ref<const Matrix>& reference,
               const MissingMask& mask) {
  if (mask.size() == 0) throw InvalidArgument("gap_mse: empty mask");
  return masked_mse(reconstruction, reference, MissingMask(!mask));
}

Matrix euler_one_step(const CoefficientTable& field, double dt, const Eigen::Ref<const Vector>& last_train,
                      const Eigen::Ref<const Matrix>& test) {
  Matrix out(test.rows(), test.cols());
  Vector previous = last_train;
  for (Eigen::Index t = 0; t < test.rows(); ++t) {
    out.row(t) = (previous + dt * field.evaluate(previous)).transpose();
    previous = test.row(t).transpose();
  }
  return out;
}

std::string eval_csv_header() { return "system,noise_ratio,seed,method,coefficient_error,mse"; }

std::string to_csv(const EvalRow& row) {
  std::ostringstream out;
  out << row.system << ',' << row.noise_ratio << ',' << row.seed << ',' << row.method << ','
      << std::setprecision(10) << row.coefficient_error << ',' << row.mse;
  return out.str();
}

}  // namespace lanolem
