#include "lanolem/stlsq.hpp"

#include <cmath>
#include <limits>

#include "lanolem/errors.hpp"

namespace lanolem {

Matrix finite_diff_derivatives(const Eigen::Ref<const Matrix>& X, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("finite differences: dt must be positive");
  const Eigen::Index n = X.rows();
  if (n < 3) throw InvalidArgument("finite differences: need at least three samples");
  Matrix out(n, X.cols());
  for (Eigen::Index t = 1; t + 1 < n; ++t) out.row(t) = (X.row(t + 1) - X.row(t - 1)) / (2.0 * dt);
  out.row(0) = (-3.0 * X.row(0) + 4.0 * X.row(1) - X.row(2)) / (2.0 * dt);
  out.row(n - 1) = (3.0 * X.row(n - 1) - 4.0 * X.row(n - 2) + X.row(n - 3)) / (2.0 * dt);
  return out;
}

Matrix library_matrix(const Eigen::Ref<const Matrix>& X, int degree) {
  const auto columns = CoefficientTable::column_exponents(static_cast<int>(X.cols()), degree);
  Matrix out(X.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    auto col = out.col(static_cast<Eigen::Index>(c));
    col.setOnes();
    for (Eigen::Index i = 0; i < X.cols(); ++i)
      for (int e = 0; e < columns[c][i]; ++e) col.array() *= X.col(i).array();
  }
  return out;
}

void StlsqConfig::validate() const {
  if (!(threshold >= 0.0) || !(alpha >= 0.0)) throw InvalidArgument("stlsq: threshold and alpha must be >= 0");
  if (max_sweeps < 0) throw InvalidArgument("stlsq: max_sweeps must be >= 0");
}

namespace {

/// argmin ||y - L w||^2 + alpha ||w||^2 over the listed columns, via QR of the stacked system.
Vector ridge_solve(const Matrix& library, const Eigen::Ref<const Vector>& y, const std::vector<int>& support,
                   double alpha) {
  const Eigen::Index n = library.rows();
  const Eigen::Index m = static_cast<Eigen::Index>(support.size());
  Matrix design = Matrix::Zero(n + (alpha > 0.0 ? m : 0), m);
  Vector rhs = Vector::Zero(design.rows());
  for (Eigen::Index j = 0; j < m; ++j) design.col(j).head(n) = library.col(support[j]);
  rhs.head(n) = y;
  if (alpha > 0.0) design.bottomRows(m).diagonal().setConstant(std::sqrt(alpha));
  return design.colPivHouseholderQr().solve(rhs);
}

}  // namespace

StlsqResult stlsq_fit(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Matrix>& dX, int degree,
                      const StlsqConfig& cfg) {
  cfg.validate();
  if (X.rows() != dX.rows() || X.cols() != dX.cols()) throw InvalidArgument("stlsq: X and dX shapes differ");
  const int d = static_cast<int>(X.cols());
  const Matrix library = library_matrix(X, degree);
  const int p = static_cast<int>(library.cols());

  StlsqResult result;
  result.table = CoefficientTable::zeros(d, degree);
  result.empty_rows.assign(d, false);
  std::vector<std::vector<int>> support(d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < p; ++j) support[i].push_back(j);
    const Vector w = ridge_solve(library, dX.col(i), support[i], cfg.alpha);
    for (int j = 0; j < p; ++j) result.table.values(i, j) = w[j];
  }
  auto total_support = [&] {
    int total = 0;
    for (const auto& s : support) total += static_cast<int>(s.size());
    return total;
  };
  result.support_history.push_back(total_support());

  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    bool changed = false;
    for (int i = 0; i < d; ++i) {
      std::vector<int> kept;
      for (int j : support[i]) {
        if (std::abs(result.table.values(i, j)) >= cfg.threshold) kept.push_back(j);
      }
      if (kept.size() == support[i].size()) continue;
      changed = true;
      support[i] = std::move(kept);
      result.table.values.row(i).setZero();
      if (support[i].empty()) continue;
      const Vector w = ridge_solve(library, dX.col(i), support[i], cfg.alpha);
      for (std::size_t a = 0; a < support[i].size(); ++a) result.table.values(i, support[i][a]) = w[static_cast<Eigen::Index>(a)];
    }
    if (!changed) break;
    ++result.sweeps;
    result.support_history.push_back(total_support());
  }
  for (int i = 0; i < d; ++i) result.empty_rows[i] = support[i].empty();
  return result;
}

double stlsq_aic(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Matrix>& dX, const CoefficientTable& table) {
  const Matrix residual = dX - library_matrix(X, table.degree) * table.values.transpose();
  const double n = static_cast<double>(X.rows());
  double aic = 0.0;
  for (Eigen::Index i = 0; i < dX.cols(); ++i) {
    const double rss = std::max(residual.col(i).squaredNorm(), std::numeric_limits<double>::min());
    const double support = static_cast<double>((table.values.row(i).array() != 0.0).count());
    aic += n * std::log(rss / n) + 2.0 * support;
  }
  return aic;
}

StlsqSelection stlsq_select(const Eigen::Ref<const Matrix>& X, double dt, const StlsqGrid& grid) {
  if (grid.degrees.empty() || grid.alphas.empty() || grid.thresholds.empty()) {
    throw InvalidArgument("stlsq_select: empty grid");
  }
  const Matrix dX = finite_diff_derivatives(X, dt);
  StlsqSelection best;
  best.aic = std::numeric_limits<double>::infinity();
  for (int degree : grid.degrees) {
    for (double alpha : grid.alphas) {
      for (double threshold : grid.thresholds) {
        StlsqConfig cfg{threshold, alpha, 20};
        StlsqResult fit = stlsq_fit(X, dX, degree, cfg);
        const double aic = stlsq_aic(X, dX, fit.table);
        if (aic < best.aic) {
          best = StlsqSelection{std::move(fit), degree, cfg, aic};
        }
      }
    }
  }
  return best;
}

}  // namespace lanolem
