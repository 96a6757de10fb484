#include "lanolem/em.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "lanolem/errors.hpp"
#include "lanolem/log.hpp"

namespace lanolem {
namespace {

struct ColumnStats {
  Vector mean;
  Vector var;
};

ColumnStats column_stats(const Eigen::Ref<const Matrix>& X, const MissingMask& mask) {
  const int d = static_cast<int>(X.cols());
  ColumnStats out{Vector::Zero(d), Vector::Zero(d)};
  for (int i = 0; i < d; ++i) {
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index t = 0; t < X.rows(); ++t) {
      if (is_missing(mask, t, i)) continue;
      sum += X(t, i);
      ++count;
    }
    if (count == 0) throw InvalidArgument("initialize: column " + std::to_string(i + 1) + " has no observations");
    out.mean[i] = sum / count;
    double sq = 0.0;
    for (Eigen::Index t = 0; t < X.rows(); ++t) {
      if (is_missing(mask, t, i)) continue;
      const double c = X(t, i) - out.mean[i];
      sq += c * c;
    }
    out.var[i] = sq / count;
  }
  return out;
}

Matrix diag_floor(const Vector& variances) {
  return floor_covariance(Matrix((0.1 * variances).asDiagonal()));
}

void check_data(const Eigen::Ref<const Matrix>& X, const MissingMask& mask) {
  if (mask.size() != 0 && (mask.rows() != X.rows() || mask.cols() != X.cols())) {
    throw InvalidArgument("fit: mask shape does not match data");
  }
  for (Eigen::Index t = 0; t < X.rows(); ++t) {
    for (Eigen::Index i = 0; i < X.cols(); ++i) {
      if (!is_missing(mask, t, i) && !std::isfinite(X(t, i))) {
        throw InvalidArgument("fit: non-finite observed value at row " + std::to_string(t) + ", column " +
                              std::to_string(i + 1));
      }
    }
  }
}

int count_nonzero(const Matrix& m) { return static_cast<int>((m.array() != 0.0).count()); }

}  // namespace

void FitOptions::validate() const {
  if (max_outer_iters < 0) throw InvalidArgument("fit options: max_outer_iters must be >= 0");
  if (!(outer_tol > 0.0)) throw InvalidArgument("fit options: outer_tol must be positive");
  if (!(prior_cov_scale > 0.0)) throw InvalidArgument("fit options: prior_cov_scale must be positive");
  if (max_inner_iters < 0 || !(inner_tol >= 0.0)) throw InvalidArgument("fit options: bad inner-loop settings");
  if (smoothing_half_width < 1 || smoothing_order < 0) throw InvalidArgument("fit options: bad smoothing window");
}

Vector prior_mean_for(const FitOptions& opts, int k) {
  if (opts.prior_mean) {
    if (opts.prior_mean->size() != k) throw InvalidArgument("fit options: prior mean has wrong dimension");
    return *opts.prior_mean;
  }
  return Vector::Zero(k);
}

Vector prior_mean_for(const FitOptions& opts, const ModelParams& theta, const Eigen::Ref<const Matrix>& X,
                      const MissingMask& mask) {
  if (opts.prior_mean || !opts.prior_from_data) return prior_mean_for(opts, theta.k());
  // least squares through the observed cells of the first row
  std::vector<int> observed;
  for (int i = 0; i < theta.d(); ++i) {
    if (!is_missing(mask, 0, i)) observed.push_back(i);
  }
  if (observed.empty()) return Vector::Zero(theta.k());
  Matrix c(observed.size(), theta.k());
  Vector r(observed.size());
  for (std::size_t a = 0; a < observed.size(); ++a) {
    c.row(a) = theta.C.row(observed[a]);
    r[a] = X(0, observed[a]) - theta.u[observed[a]];
  }
  return c.completeOrthogonalDecomposition().solve(r);
}

Matrix prior_cov_for(const FitOptions& opts, int k) { return opts.prior_cov_scale * Matrix::Identity(k, k); }

Matrix local_polynomial_smooth(const Eigen::Ref<const Matrix>& X, const MissingMask& mask, int half_width, int order) {
  if (half_width < 1 || order < 0) throw InvalidArgument("smooth: bad window");
  const int n = static_cast<int>(X.rows());
  Matrix out(n, X.cols());
  std::vector<int> rows;
  for (Eigen::Index i = 0; i < X.cols(); ++i) {
    for (int t = 0; t < n; ++t) {
      // grow the window until it holds enough observations for the requested order
      for (int h = half_width;; h *= 2) {
        rows.clear();
        for (int r = std::max(0, t - h); r <= std::min(n - 1, t + h); ++r) {
          if (!is_missing(mask, r, i)) rows.push_back(r);
        }
        if (static_cast<int>(rows.size()) > order || h >= n) break;
      }
      if (rows.empty()) throw InvalidArgument("smooth: column " + std::to_string(i + 1) + " has no observations");
      const int m = static_cast<int>(rows.size());
      const int cols = std::min(order + 1, m);
      Matrix design(m, cols);
      Vector y(m);
      for (int a = 0; a < m; ++a) {
        const double offset = static_cast<double>(rows[a] - t) / half_width;
        double power = 1.0;
        for (int c = 0; c < cols; ++c, power *= offset) design(a, c) = power;
        y[a] = X(rows[a], i);
      }
      out(t, i) = design.colPivHouseholderQr().solve(y)[0];
    }
  }
  return out;
}

ModelParams initialize(const Eigen::Ref<const Matrix>& X, const MissingMask& mask, const Hyperparams& hyper,
                       const FitOptions& opts) {
  hyper.validate();
  const int n = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  const int k = hyper.k;
  if (n < 2) throw InvalidArgument("initialize: need at least two time steps");

  const ColumnStats stats = column_stats(X, mask);
  ModelParams theta = ModelParams::identity(PolyBasis(k, hyper.d_phi));
  theta.u = stats.mean;
  theta.R = diag_floor(stats.var);

  if (opts.init_mode == InitMode::identity_observed) {
    if (k != d) throw InvalidArgument("initialize: identity-observed mode requires k == d");
    theta.C = Matrix::Identity(d, k);
    theta.Gamma = diag_floor(stats.var);
    return theta;
  }

  if (opts.init_mode == InitMode::smoothed_regression) {
    if (k != d) throw InvalidArgument("initialize: smoothed-regression mode requires k == d");
    // states live in the observed frame (u = 0): shifting them would densify a sparse field
    theta.u.setZero();
    Vector scale = Vector::Ones(d);
    if (opts.scale_states) {
      // diagonal scaling maps monomials to monomials, so the sparsity pattern survives
      for (int i = 0; i < d; ++i) scale[i] = std::sqrt(stats.var[i] + stats.mean[i] * stats.mean[i]);
      if (!(scale.minCoeff() > 0.0)) throw InvalidArgument("initialize: a column is identically zero");
    }
    theta.C = scale.asDiagonal();
    theta.Gamma = diag_floor(stats.var.cwiseQuotient(scale.cwiseAbs2()));
    const Matrix smooth = local_polynomial_smooth(X, mask, opts.smoothing_half_width, opts.smoothing_order);
    SmoothedTrajectory states;
    for (int t = 0; t < n; ++t) {
      states.mean.emplace_back(smooth.row(t).transpose().cwiseQuotient(scale));
      states.cov.emplace_back(Matrix::Zero(k, k));
      if (t + 1 < n) states.gain.emplace_back(Matrix::Zero(k, k));
    }
    const MomentSet moments = compute_moments(states, theta.basis, MomentMode::approximate);
    const SummedMoments sums = SummedMoments::from(moments, X, mask);
    const SparseFitConfig cfg{hyper.lambda1, hyper.lambda2, std::max(opts.max_inner_iters, 20000), 1e-10,
                              SparseSolver::accelerated};
    // the penalty is weighed against Gamma^-1, so refit once with the residual covariance
    for (int pass = 0; pass < 2; ++pass) {
      const SparseFitResult sparse = fit_sparse(sums, theta, cfg, opts.linear_only);
      theta.A = sparse.A;
      theta.F = sparse.F;
      theta.b = sparse.b;
      Matrix gamma = Matrix::Zero(k, k);
      for (int t = 0; t + 1 < n; ++t) {
        const Vector r = states.mean[t + 1] - step_mean(theta, states.mean[t]);
        gamma += r * r.transpose();
      }
      theta.Gamma = floor_covariance(gamma / (n - 1));
    }
    Vector noise = Vector::Zero(d);
    for (int i = 0; i < d; ++i) {
      int count = 0;
      for (int t = 0; t < n; ++t) {
        if (is_missing(mask, t, i)) continue;
        const double e = X(t, i) - smooth(t, i);
        noise[i] += e * e;
        ++count;
      }
      noise[i] /= std::max(count, 1);
    }
    theta.R = floor_covariance(Matrix(noise.asDiagonal()));
    return theta;
  }

  if (k > d) throw InvalidArgument("initialize: svd mode requires k <= d");
  Matrix centered(n, d);
  for (int t = 0; t < n; ++t) {
    for (int i = 0; i < d; ++i) centered(t, i) = is_missing(mask, t, i) ? 0.0 : X(t, i) - stats.mean[i];
  }
  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  Matrix C = svd.matrixV().leftCols(k);
  for (int j = 0; j < k; ++j) {
    Eigen::Index arg = 0;
    C.col(j).cwiseAbs().maxCoeff(&arg);
    if (C(arg, j) < 0.0) C.col(j) *= -1.0;
  }
  theta.C = C;
  const Matrix states = centered * C;
  Vector state_var = (states.array().square().colwise().sum() / n).transpose();
  theta.Gamma = diag_floor(state_var);
  return theta;
}

FitReport fit(const Eigen::Ref<const Matrix>& X, const MissingMask& mask, const Hyperparams& hyper,
              const FitOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  hyper.validate();
  opts.validate();
  check_data(X, mask);
  if (X.rows() < 2) throw InvalidArgument("fit: need at least two time steps");

  ModelParams theta = opts.initial ? *opts.initial : initialize(X, mask, hyper, opts);
  theta.validate();
  if (theta.k() != hyper.k || theta.d() != X.cols()) throw InvalidArgument("fit: initial model has wrong dimensions");
  if (opts.initial && theta.basis.d_phi() != hyper.d_phi) {
    throw InvalidArgument("fit: initial model order does not match d_phi");
  }
  const Vector prior_mean = prior_mean_for(opts, theta, X, mask);
  const Matrix prior_cov = prior_cov_for(opts, hyper.k);

  LearnOptions learn_opts;
  learn_opts.sparse = SparseFitConfig{hyper.lambda1, hyper.lambda2, opts.max_inner_iters, opts.inner_tol, opts.solver};
  learn_opts.linear_only = opts.linear_only;
  learn_opts.freeze_c = opts.freeze_c;
  learn_opts.center_c_with_u = opts.center_c_with_u;
  if (opts.linear_only) theta.F.setZero();

  FitReport report{.objective_trace = {}, .tracked_trace = {}, .theta = theta, .smoothed = {}};
  double best = std::numeric_limits<double>::infinity();
  double previous = std::numeric_limits<double>::quiet_NaN();

  for (int it = 0;; ++it) {
    const char* stage = "inference";
    try {
      ForwardPass fwd = ekf_forward(theta, X, mask, prior_mean, prior_cov);
      SmoothedTrajectory smoothed = rts_backward(theta, fwd);
      MomentSet moments = compute_moments(smoothed, theta.basis, opts.moment_mode);
      SummedMoments sums = SummedMoments::from(moments, X, mask);

      stage = "objective";
      const double objective = penalized_objective(theta, X, mask, smoothed, sums, hyper.lambda1, hyper.lambda2);
      if (!std::isfinite(objective)) throw NumericalError("objective", it, "penalized objective is not finite");
      report.objective_trace.push_back(objective);
      const double tracked = opts.tracking == Tracking::q_function
                                 ? objective
                                 : -fwd.log_likelihood + elastic_net_penalty(theta, hyper.lambda1, hyper.lambda2);
      if (!std::isfinite(tracked)) throw NumericalError("objective", it, "tracked objective is not finite");
      report.tracked_trace.push_back(tracked);
      log::debug("em iteration ", it, " objective ", objective, " tracked ", tracked);
      if (tracked < best) {
        best = tracked;
        report.best_iteration = it;
        report.theta = theta;
        report.smoothed = smoothed;
      }

      if (it > 0) {
        const double scale = std::max(std::abs(previous), std::numeric_limits<double>::min());
        if (std::abs(tracked - previous) < opts.outer_tol * scale) {
          report.converged = true;
          break;
        }
      }
      if (it == opts.max_outer_iters) break;
      previous = tracked;

      stage = "learning";
      LearnResult step = learn(theta, smoothed, moments, sums, X, mask, learn_opts);
      report.inner_iterations += step.sparse.iterations;
      theta = std::move(step.theta);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string("em ") + stage, it, e.what());
    }
  }

  report.n_iters = static_cast<int>(report.objective_trace.size());
  report.nonzero_A_minus_I = count_nonzero(report.theta.A - Matrix::Identity(hyper.k, hyper.k));
  report.nonzero_F = count_nonzero(report.theta.F);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

FitReport fit_restarts(const Eigen::Ref<const Matrix>& X, const MissingMask& mask, const Hyperparams& hyper,
                       const FitOptions& opts, int restarts) {
  if (restarts < 1) throw InvalidArgument("fit_restarts: need at least one restart");
  std::optional<FitReport> best;
  for (int r = 0; r < restarts; ++r) {
    FitOptions run = opts;
    if (r > 0) {
      ModelParams start = opts.initial ? *opts.initial : initialize(X, mask, hyper, opts);
      std::mt19937_64 rng(opts.seed + static_cast<std::uint64_t>(r));
      std::normal_distribution<double> normal(0.0, 0.01);
      for (Eigen::Index i = 0; i < start.A.size(); ++i) start.A.data()[i] += normal(rng);
      run.initial = std::move(start);
    }
    FitReport rep = fit(X, mask, hyper, run);
    const double final_obj = rep.tracked_trace[rep.best_iteration];
    if (!best || final_obj < best->tracked_trace[best->best_iteration]) best = std::move(rep);
  }
  return *best;
}

FitOptions benchmark_options(int k, int d) {
  FitOptions opts;
  opts.init_mode = k == d ? InitMode::smoothed_regression : InitMode::svd;
  opts.solver = SparseSolver::accelerated;
  opts.max_inner_iters = 5000;
  opts.prior_from_data = true;
  opts.freeze_c = k == d;
  return opts;
}

}  // namespace lanolem
