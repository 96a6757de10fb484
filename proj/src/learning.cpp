#include "lanolem/learning.hpp"

#include <cmath>
#include <limits>

#include "lanolem/errors.hpp"
#include "lanolem/kernels.hpp"

namespace lanolem {
namespace {

std::span<const double> flat(const Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }

Matrix spd_inverse(const Eigen::Ref<const Matrix>& m, const char* stage) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    const double scale = std::max(1.0, m.diagonal().cwiseAbs().mean());
    llt.compute(m + 1e-12 * scale * Matrix::Identity(m.rows(), m.cols()));
    if (llt.info() != Eigen::Success) throw NumericalError(stage, -1, "covariance is singular");
  }
  return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

double spd_log_det(const Eigen::Ref<const Matrix>& m, const char* stage) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError(stage, -1, "covariance is not positive definite");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

/// Pieces of the sparse objective that do not depend on Theta.
struct SparseTerms {
  Matrix gamma_inv;
  Matrix q;           // S_np - b S_p^T
  double constant;    // 1/2 tr(Gamma^{-1} (S_nn - b S_n^T - S_n b^T + (N-1) b b^T))
};

SparseTerms sparse_terms(const Eigen::Ref<const Vector>& b, const Eigen::Ref<const Matrix>& Gamma,
                         const SummedMoments& sums) {
  SparseTerms terms;
  terms.gamma_inv = spd_inverse(Gamma, "sparse objective");
  terms.q = sums.S_np - b * sums.S_p.transpose();
  const Matrix base = sums.S_nn - b * sums.S_n.transpose() - sums.S_n * b.transpose() +
                      static_cast<double>(sums.n - 1) * b * b.transpose();
  terms.constant = 0.5 * (terms.gamma_inv.cwiseProduct(base)).sum();
  return terms;
}

/// g(Theta) given M = Theta S_pp.
double smooth_value(const SparseTerms& terms, const Matrix& theta, const Matrix& m, double lambda2,
                    const ShiftTarget& shift) {
  const Matrix g_theta = terms.gamma_inv * theta;
  double value = terms.constant + 0.5 * kernels::dot(flat(g_theta), flat(m)) - kernels::dot(flat(g_theta), flat(terms.q));
  if (lambda2 > 0.0) value += 0.5 * lambda2 * kernels::squared_distance(flat(theta), flat(shift.matrix()));
  return value;
}

void check_sparse_shapes(const Eigen::Ref<const Matrix>& theta_s, const SummedMoments& sums, const ShiftTarget& shift) {
  if (theta_s.cols() != sums.S_pp.rows() || theta_s.rows() != sums.S_np.rows() || shift.cols() != theta_s.cols() ||
      shift.k() != theta_s.rows()) {
    throw InvalidArgument("sparse objective: inconsistent shapes");
  }
}

}  // namespace

void SparseFitConfig::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw InvalidArgument("sparse fit: lambdas must be >= 0");
  if (max_inner_iters < 0) throw InvalidArgument("sparse fit: max_inner_iters must be >= 0");
  if (!(inner_tol >= 0.0)) throw InvalidArgument("sparse fit: inner_tol must be >= 0");
}

SummedMoments SummedMoments::from(const MomentSet& moments, const Eigen::Ref<const Matrix>& X,
                                   const MissingMask& mask) {
  const int n = moments.size();
  if (n < 2) throw InvalidArgument("summed moments: need at least two time steps");
  if (X.rows() != n) throw InvalidArgument("summed moments: data length does not match moments");
  const int k = static_cast<int>(moments.s[0].size());
  const int p = static_cast<int>(moments.sphi[0].size());
  const int d = static_cast<int>(X.cols());

  SummedMoments out;
  out.n = n;
  out.S_pp = Matrix::Zero(p, p);
  out.S_np = Matrix::Zero(k, p);
  out.S_p = Vector::Zero(p);
  out.S_n = Vector::Zero(k);
  out.S_nn = Matrix::Zero(k, k);
  for (int t = 0; t + 1 < n; ++t) {
    out.S_pp += moments.sphi_sphi[t];
    out.S_np += moments.next_sphi[t];
    out.S_p += moments.sphi[t];
    out.S_n += moments.s[t + 1];
    out.S_nn += moments.ss[t + 1];
  }
  out.S_pp = 0.5 * (out.S_pp + out.S_pp.transpose());

  out.xs = Matrix::Zero(d, k);
  out.ss = Matrix::Zero(k, k);
  out.x_sum = Vector::Zero(d);
  out.s_sum = Vector::Zero(k);
  for (int t = 0; t < n; ++t) {
    out.ss += moments.ss[t];
    out.s_sum += moments.s[t];
    for (int i = 0; i < d; ++i) {
      if (is_missing(mask, t, i)) continue;
      out.xs.row(i) += X(t, i) * moments.s[t].transpose();
      out.x_sum[i] += X(t, i);
    }
  }
  return out;
}

SummedMoments SummedMoments::linear_block(int k) const {
  SummedMoments out = *this;
  out.S_pp = S_pp.topLeftCorner(k, k);
  out.S_np = S_np.leftCols(k);
  out.S_p = S_p.head(k);
  return out;
}

double soft_threshold(double beta, double tau) {
  if (beta > tau) return beta - tau;
  if (beta < -tau) return beta + tau;
  return 0.0;
}

double step_size(const Eigen::Ref<const Matrix>& Gamma, const Eigen::Ref<const Matrix>& S_pp, double lambda2) {
  const Matrix gamma_inv = spd_inverse(Gamma, "step size");
  return 1.0 / (gamma_inv.norm() * S_pp.norm() + lambda2);
}

Matrix sparse_gradient(const Eigen::Ref<const Matrix>& theta_s, const Eigen::Ref<const Vector>& b,
                       const Eigen::Ref<const Matrix>& Gamma, const SummedMoments& sums, double lambda2,
                       const ShiftTarget& shift) {
  check_sparse_shapes(theta_s, sums, shift);
  const Matrix gamma_inv = spd_inverse(Gamma, "sparse gradient");
  return gamma_inv * (theta_s * sums.S_pp + b * sums.S_p.transpose() - sums.S_np) +
         lambda2 * (theta_s - shift.matrix());
}

double sparse_smooth_objective(const Eigen::Ref<const Matrix>& theta_s, const Eigen::Ref<const Vector>& b,
                               const Eigen::Ref<const Matrix>& Gamma, const SummedMoments& sums, double lambda2,
                               const ShiftTarget& shift) {
  check_sparse_shapes(theta_s, sums, shift);
  const SparseTerms terms = sparse_terms(b, Gamma, sums);
  const Matrix theta = theta_s;
  return smooth_value(terms, theta, theta * sums.S_pp, lambda2, shift);
}

double sparse_objective(const Eigen::Ref<const Matrix>& theta_s, const Eigen::Ref<const Vector>& b,
                        const Eigen::Ref<const Matrix>& Gamma, const SummedMoments& sums, double lambda1,
                        double lambda2, const ShiftTarget& shift) {
  const Matrix theta = theta_s;
  return sparse_smooth_objective(theta_s, b, Gamma, sums, lambda2, shift) +
         lambda1 * kernels::l1_distance(flat(theta), flat(shift.matrix()));
}

namespace {

SparseFitResult fit_sparse_ista(const SummedMoments& s, const ModelParams& theta, const SparseFitConfig& cfg,
                                bool linear_only) {
  const int k = theta.k();
  const int k_phi = linear_only ? 0 : theta.k_phi();
  const ShiftTarget shift(k, k_phi);
  const SparseTerms terms = sparse_terms(theta.b, theta.Gamma, s);

  SparseFitResult result;
  result.step = 1.0 / (terms.gamma_inv.norm() * s.S_pp.norm() + cfg.lambda2);
  if (!std::isfinite(result.step) || result.step <= 0.0) {
    throw NumericalError("fit_sparse", -1, "step size is not finite");
  }
  const double tau = result.step * cfg.lambda1;

  Matrix current = linear_only ? theta.A : theta.theta_s();
  Matrix next(current.rows(), current.cols());
  Matrix m(current.rows(), current.cols());
  double previous = std::numeric_limits<double>::infinity();

  for (int it = 0;; ++it) {
    m.noalias() = current * s.S_pp;
    const double f = smooth_value(terms, current, m, cfg.lambda2, shift) +
                     cfg.lambda1 * kernels::l1_distance(flat(current), flat(shift.matrix()));
    if (!std::isfinite(f)) throw NumericalError("fit_sparse", it, "objective is not finite");
    result.objective_trace.push_back(f);
    if (it > 0) {
      const double scale = std::max(std::abs(previous), std::numeric_limits<double>::min());
      // f is a small difference of large terms; rounding is relative to the largest of them
      const double rounding = std::max(scale, std::abs(terms.constant));
      if (f > previous + 1e-12 * rounding) {
        ++result.descent_violations;
        if (f > previous + 1e-6 * rounding) {
          throw NumericalError("fit_sparse", it, "objective increased under the fixed step");
        }
      }
      if (std::abs(f - previous) <= cfg.inner_tol * scale) {
        result.converged = true;
        break;
      }
    }
    if (it == cfg.max_inner_iters) break;
    previous = f;

    // gradient step, then prox about the shift target
    Matrix step_point = current - result.step * (terms.gamma_inv * (m - terms.q));
    if (cfg.lambda2 > 0.0) step_point -= result.step * cfg.lambda2 * (current - shift.matrix());
    kernels::shifted_soft_threshold(flat(step_point), flat(shift.matrix()), tau,
                                    std::span<double>(next.data(), static_cast<std::size_t>(next.size())));
    ++result.iterations;
    if (next == current) {
      result.converged = true;
      break;
    }
    current.swap(next);
  }

  result.A = current.leftCols(k);
  result.F = linear_only ? Matrix::Zero(k, theta.k_phi()) : Matrix(current.rightCols(k_phi));
  const Matrix offset = current - shift.matrix();
  result.zero_count = static_cast<int>((offset.array() == 0.0).count());
  return result;
}

SparseFitResult fit_sparse_accelerated(const SummedMoments& s, const ModelParams& theta, const SparseFitConfig& cfg,
                                       bool linear_only) {
  const int k = theta.k();
  const int k_phi = linear_only ? 0 : theta.k_phi();
  const int p = k + k_phi;
  const ShiftTarget shift(k, k_phi);
  const Matrix gamma_inv = spd_inverse(theta.Gamma, "fit_sparse");

  // Augmented regressor [s_phi; 1] so b is fitted alongside Theta without a penalty.
  Matrix gram(p + 1, p + 1);
  gram.topLeftCorner(p, p) = s.S_pp;
  gram.topRightCorner(p, 1) = s.S_p;
  gram.bottomLeftCorner(1, p) = s.S_p.transpose();
  gram(p, p) = static_cast<double>(s.n - 1);
  Matrix cross(k, p + 1);
  cross.leftCols(p) = s.S_np;
  cross.col(p) = s.S_n;
  Matrix target = Matrix::Zero(k, p + 1);
  target.leftCols(p) = shift.matrix();

  // Diagonal majorizer of the Hessian: lambda_max(Gamma^-1) * rho * diag(G), rho being the
  // largest eigenvalue of the unit-diagonal rescaling of G.
  const double diag_floor = 1e-300;
  const Vector scale = gram.diagonal().cwiseMax(diag_floor).cwiseSqrt();
  const Matrix normalized = scale.cwiseInverse().asDiagonal() * gram * scale.cwiseInverse().asDiagonal();
  const double rho = Eigen::SelfAdjointEigenSolver<Matrix>(normalized, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  const double gamma_max = Eigen::SelfAdjointEigenSolver<Matrix>(gamma_inv, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  Vector weight = (gamma_max * rho) * gram.diagonal().cwiseMax(diag_floor);
  weight.head(p).array() += cfg.lambda2;
  if (!weight.allFinite() || weight.minCoeff() <= 0.0) throw NumericalError("fit_sparse", -1, "step size is not finite");

  const double constant = 0.5 * gamma_inv.cwiseProduct(s.S_nn).sum();
  auto objective = [&](const Matrix& z) {
    const Matrix zg = z * gram;
    double value = constant + 0.5 * (gamma_inv * z).cwiseProduct(zg - 2.0 * cross).sum();
    const Matrix offset = z.leftCols(p) - shift.matrix();
    value += 0.5 * cfg.lambda2 * offset.squaredNorm() + cfg.lambda1 * offset.cwiseAbs().sum();
    return value;
  };
  auto prox_step = [&](const Matrix& y, Matrix& out) {
    Matrix grad = gamma_inv * (y * gram - cross);
    grad.leftCols(p) += cfg.lambda2 * (y.leftCols(p) - shift.matrix());
    out = y - grad * weight.cwiseInverse().asDiagonal();
    for (int j = 0; j < p; ++j) {
      const double tau = cfg.lambda1 / weight[j];
      for (int i = 0; i < k; ++i) out(i, j) = target(i, j) + soft_threshold(out(i, j) - target(i, j), tau);
    }
  };

  SparseFitResult result;
  result.step = 1.0 / weight.maxCoeff();
  Matrix z(k, p + 1);
  z.leftCols(p) = linear_only ? theta.A : theta.theta_s();
  z.col(p) = theta.b;
  Matrix y = z;
  Matrix next(k, p + 1);
  double t_momentum = 1.0;
  double f = objective(z);
  if (!std::isfinite(f)) throw NumericalError("fit_sparse", 0, "objective is not finite");
  result.objective_trace.push_back(f);

  // Without the l1 term the objective is quadratic: solve
  // (G kron Gamma^-1 + lambda2 D kron I) vec(z) = vec(Gamma^-1 cross + lambda2 target),
  // D masking out the b column. Kept only if it does not do worse than the warm start.
  if (cfg.lambda1 == 0.0 && cfg.max_inner_iters > 0) {
    const int n = k * (p + 1);
    Matrix system(n, n);
    for (int a = 0; a <= p; ++a) {
      for (int c = 0; c <= p; ++c) system.block(a * k, c * k, k, k) = gram(a, c) * gamma_inv;
    }
    for (int i = 0; i < k * p; ++i) system(i, i) += cfg.lambda2;
    Matrix rhs = gamma_inv * cross;
    rhs.leftCols(p) += cfg.lambda2 * shift.matrix();
    Eigen::LDLT<Matrix> ldlt(system);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      const Vector solved = ldlt.solve(Eigen::Map<const Vector>(rhs.data(), n));
      const Matrix candidate = Eigen::Map<const Matrix>(solved.data(), k, p + 1);
      const double f_direct = candidate.allFinite() ? objective(candidate) : std::numeric_limits<double>::infinity();
      if (f_direct <= f) {
        z = candidate;
        f = f_direct;
        result.objective_trace.push_back(f);
        result.iterations = 1;
        result.converged = true;
      }
    }
  }

  bool plain = true;  // whether y == z (no momentum in the current extrapolation point)
  while (!result.converged && result.iterations < cfg.max_inner_iters) {
    prox_step(y, next);
    ++result.iterations;
    const double f_next = objective(next);
    if (!std::isfinite(f_next)) throw NumericalError("fit_sparse", result.iterations, "objective is not finite");
    const double scale_f = std::max(std::abs(f), std::numeric_limits<double>::min());
    if (f_next > f) {
      if (plain) {
        // a plain majorized step cannot rise beyond rounding; treat it as converged
        if (f_next > f + 1e-6 * std::max(scale_f, std::abs(constant))) throw NumericalError("fit_sparse", result.iterations, "objective increased");
        result.converged = true;
        break;
      }
      y = z;  // restart the momentum
      t_momentum = 1.0;
      plain = true;
      continue;
    }
    const double change = f - f_next;
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
    y = next + ((t_momentum - 1.0) / t_next) * (next - z);
    plain = t_momentum == 1.0;
    t_momentum = t_next;
    z.swap(next);
    f = f_next;
    result.objective_trace.push_back(f);
    if (change <= cfg.inner_tol * scale_f) {
      result.converged = true;
      break;
    }
  }

  result.A = z.leftCols(k);
  result.F = linear_only ? Matrix::Zero(k, theta.k_phi()) : Matrix(z.middleCols(k, k_phi));
  result.b = z.col(p);
  const Matrix offset = z.leftCols(p) - shift.matrix();
  result.zero_count = static_cast<int>((offset.array() == 0.0).count());
  return result;
}

}  // namespace

SparseFitResult fit_sparse(const SummedMoments& sums, const ModelParams& theta, const SparseFitConfig& cfg,
                           bool linear_only) {
  cfg.validate();
  const SummedMoments reduced = linear_only ? sums.linear_block(theta.k()) : SummedMoments{};
  const SummedMoments& s = linear_only ? reduced : sums;
  return cfg.solver == SparseSolver::accelerated ? fit_sparse_accelerated(s, theta, cfg, linear_only)
                                                 : fit_sparse_ista(s, theta, cfg, linear_only);
}

CFit fit_C(const MomentSet& moments, const SummedMoments& sums, const Eigen::Ref<const Matrix>& X,
           const MissingMask& mask, const Vector* center_u) {
  const int n = moments.size();
  const int d = static_cast<int>(X.cols());
  const int k = static_cast<int>(sums.ss.rows());
  CFit out;
  out.C = Matrix::Zero(d, k);

  auto solve_row = [&](const Matrix& gram, const Eigen::RowVectorXd& rhs) -> Eigen::RowVectorXd {
    Eigen::LLT<Matrix> llt(gram);
    if (llt.info() != Eigen::Success) {
      out.ridge_used = true;
      const double scale = std::max(1.0, gram.diagonal().cwiseAbs().mean());
      llt.compute(gram + 1e-10 * scale * Matrix::Identity(k, k));
      if (llt.info() != Eigen::Success) throw NumericalError("fit_C", -1, "state Gram matrix is singular");
    }
    return llt.solve(rhs.transpose()).transpose();
  };

  const bool any_missing = mask.size() != 0 && mask.any();
  if (!any_missing) {
    Matrix xs = sums.xs;
    if (center_u != nullptr) xs -= (*center_u) * sums.s_sum.transpose();
    for (int i = 0; i < d; ++i) out.C.row(i) = solve_row(sums.ss, xs.row(i));
    return out;
  }

  for (int i = 0; i < d; ++i) {
    Matrix gram = Matrix::Zero(k, k);
    Eigen::RowVectorXd rhs = Eigen::RowVectorXd::Zero(k);
    for (int t = 0; t < n; ++t) {
      if (is_missing(mask, t, i)) continue;
      gram += moments.ss[t];
      const double x = X(t, i) - (center_u != nullptr ? (*center_u)[i] : 0.0);
      rhs += x * moments.s[t].transpose();
    }
    out.C.row(i) = solve_row(gram, rhs);
  }
  return out;
}

Offsets fit_offsets(const MomentSet& moments, const SummedMoments& sums, const Eigen::Ref<const Matrix>& X,
                    const MissingMask& mask, const Eigen::Ref<const Matrix>& theta_s_new,
                    const Eigen::Ref<const Matrix>& C_new) {
  const int n = moments.size();
  const int d = static_cast<int>(X.cols());
  Offsets out;
  out.b = (sums.S_n - theta_s_new * sums.S_p) / static_cast<double>(n - 1);
  out.u = Vector::Zero(d);
  for (int i = 0; i < d; ++i) {
    double acc = 0.0;
    int count = 0;
    for (int t = 0; t < n; ++t) {
      if (is_missing(mask, t, i)) continue;
      acc += X(t, i) - C_new.row(i).dot(moments.s[t]);
      ++count;
    }
    out.u[i] = count > 0 ? acc / count : 0.0;
  }
  return out;
}

Covariances fit_covariances(const SmoothedTrajectory& smoothed, const MomentSet& moments,
                            const Eigen::Ref<const Matrix>& X, const MissingMask& mask, const ModelParams& updated,
                            const Eigen::Ref<const Matrix>& previous_R) {
  const int n = smoothed.size();
  const int k = updated.k();
  const int d = updated.d();
  const Matrix theta_s = updated.theta_s();

  Matrix gamma_sum = Matrix::Zero(k, k);
  for (int t = 0; t + 1 < n; ++t) {
    const Vector r = smoothed.mean[t + 1] - theta_s * moments.sphi[t] - updated.b;
    const Matrix J = transition_jacobian(updated, smoothed.mean[t]);
    const Matrix cross = smoothed.cov[t + 1] * smoothed.gain[t].transpose();
    gamma_sum += r * r.transpose() + smoothed.cov[t + 1] + J * smoothed.cov[t] * J.transpose() -
                 cross * J.transpose() - J * cross.transpose();
  }

  Matrix r_sum = Matrix::Zero(d, d);
  std::vector<int> observed;
  std::vector<int> missing;
  for (int t = 0; t < n; ++t) {
    observed.clear();
    missing.clear();
    for (int i = 0; i < d; ++i) (is_missing(mask, t, i) ? missing : observed).push_back(i);
    Vector e = Vector::Zero(d);
    const Vector fitted = updated.C * smoothed.mean[t] + updated.u;
    for (int i : observed) e[i] = X(t, i) - fitted[i];
    r_sum += e * e.transpose() + updated.C * smoothed.cov[t] * updated.C.transpose();
    if (!missing.empty()) {
      // conditional covariance of the missing cells given the observed ones, under the previous R
      const int mm = static_cast<int>(missing.size());
      const int mo = static_cast<int>(observed.size());
      Matrix r_mm(mm, mm);
      for (int a = 0; a < mm; ++a)
        for (int c = 0; c < mm; ++c) r_mm(a, c) = previous_R(missing[a], missing[c]);
      if (mo > 0) {
        Matrix r_oo(mo, mo);
        Matrix r_mo(mm, mo);
        for (int a = 0; a < mo; ++a)
          for (int c = 0; c < mo; ++c) r_oo(a, c) = previous_R(observed[a], observed[c]);
        for (int a = 0; a < mm; ++a)
          for (int c = 0; c < mo; ++c) r_mo(a, c) = previous_R(missing[a], observed[c]);
        r_mm -= r_mo * r_oo.llt().solve(r_mo.transpose());
      }
      for (int a = 0; a < mm; ++a)
        for (int c = 0; c < mm; ++c) r_sum(missing[a], missing[c]) += r_mm(a, c);
    }
  }

  Covariances out;
  out.Gamma = floor_covariance(gamma_sum / static_cast<double>(n - 1));
  out.R = floor_covariance(r_sum / static_cast<double>(n));
  return out;
}

double penalized_objective(const ModelParams& theta, const Eigen::Ref<const Matrix>& X, const MissingMask& mask,
                           const SmoothedTrajectory& smoothed, const SummedMoments& sums, double lambda1,
                           double lambda2) {
  const int n = smoothed.size();
  const int d = theta.d();
  const ShiftTarget shift(theta.k(), theta.k_phi());
  const Matrix theta_s = theta.theta_s();

  // state transitions
  const SparseTerms terms = sparse_terms(theta.b, theta.Gamma, sums);
  double value = smooth_value(terms, theta_s, theta_s * sums.S_pp, 0.0, shift);
  value += 0.5 * (n - 1) * spd_log_det(theta.Gamma, "objective Gamma");

  // observations
  Matrix full_sum = Matrix::Zero(d, d);
  int full_rows = 0;
  std::vector<int> observed;
  for (int t = 0; t < n; ++t) {
    const Vector e = X.row(t).transpose() - theta.C * smoothed.mean[t] - theta.u;
    const Matrix cwc = theta.C * smoothed.cov[t] * theta.C.transpose();
    observed.clear();
    for (int i = 0; i < d; ++i) {
      if (!is_missing(mask, t, i)) observed.push_back(i);
    }
    if (static_cast<int>(observed.size()) == d) {
      full_sum += e * e.transpose() + cwc;
      ++full_rows;
      continue;
    }
    if (observed.empty()) continue;
    const int m = static_cast<int>(observed.size());
    Matrix r_o(m, m);
    Matrix second(m, m);
    for (int a = 0; a < m; ++a) {
      for (int c = 0; c < m; ++c) {
        r_o(a, c) = theta.R(observed[a], observed[c]);
        second(a, c) = e[observed[a]] * e[observed[c]] + cwc(observed[a], observed[c]);
      }
    }
    Eigen::LLT<Matrix> llt(r_o);
    if (llt.info() != Eigen::Success) throw NumericalError("objective R", t, "covariance is not positive definite");
    value += 0.5 * (llt.solve(second).trace() + 2.0 * llt.matrixLLT().diagonal().array().log().sum());
  }
  if (full_rows > 0) {
    Eigen::LLT<Matrix> llt(theta.R);
    if (llt.info() != Eigen::Success) throw NumericalError("objective R", -1, "covariance is not positive definite");
    value += 0.5 * (llt.solve(full_sum).trace() + full_rows * 2.0 * llt.matrixLLT().diagonal().array().log().sum());
  }

  return value + elastic_net_penalty(theta, lambda1, lambda2);
}

double elastic_net_penalty(const ModelParams& theta, double lambda1, double lambda2) {
  const ShiftTarget shift(theta.k(), theta.k_phi());
  const Matrix theta_s = theta.theta_s();
  return 0.5 * lambda2 * kernels::squared_distance(flat(theta_s), flat(shift.matrix())) +
         lambda1 * kernels::l1_distance(flat(theta_s), flat(shift.matrix()));
}

LearnResult learn(const ModelParams& theta, const SmoothedTrajectory& smoothed, const MomentSet& moments,
                  const SummedMoments& sums, const Eigen::Ref<const Matrix>& X, const MissingMask& mask,
                  const LearnOptions& opts) {
  LearnResult out{theta, fit_sparse(sums, theta, opts.sparse, opts.linear_only), false};
  ModelParams& next = out.theta;
  next.A = out.sparse.A;
  next.F = out.sparse.F;

  if (!opts.freeze_c) {
    CFit c = fit_C(moments, sums, X, mask, opts.center_c_with_u ? &theta.u : nullptr);
    next.C = std::move(c.C);
    out.c_ridge_used = c.ridge_used;
  }

  Offsets offsets = fit_offsets(moments, sums, X, mask, next.theta_s(), next.C);
  next.b = std::move(offsets.b);
  next.u = std::move(offsets.u);

  Covariances cov = fit_covariances(smoothed, moments, X, mask, next, theta.R);
  next.Gamma = std::move(cov.Gamma);
  next.R = std::move(cov.R);
  return out;
}

}  // namespace lanolem
