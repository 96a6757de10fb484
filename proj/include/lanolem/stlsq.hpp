#pragma once

#include <vector>

#include "lanolem/coefficients.hpp"

namespace lanolem {

/// Central differences inside, second-order one-sided differences at both ends.
Matrix finite_diff_derivatives(const Eigen::Ref<const Matrix>& X, double dt);

/// Library matrix [1 | x | monomials up to degree] in CoefficientTable column order.
Matrix library_matrix(const Eigen::Ref<const Matrix>& X, int degree);

struct StlsqConfig {
  double threshold = 0.1;
  double alpha = 0.0;  // ridge strength
  int max_sweeps = 20;

  void validate() const;
};

struct StlsqResult {
  CoefficientTable table;
  int sweeps = 0;
  std::vector<int> support_history;  // total support after the initial solve and after each sweep
  std::vector<bool> empty_rows;      // target dimensions whose support vanished
};

/// Ridge regression of dX onto the library, then repeated thresholding and refitting on the
/// surviving support until it stops changing or max_sweeps is reached.
StlsqResult stlsq_fit(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Matrix>& dX, int degree,
                      const StlsqConfig& cfg);

/// sum over target dimensions of n ln(RSS / n) + 2 * support
double stlsq_aic(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Matrix>& dX, const CoefficientTable& table);

struct StlsqGrid {
  std::vector<int> degrees{2, 3, 4};
  std::vector<double> alphas{0.0, 1e-5, 1e-3, 0.01, 0.05, 0.2};
  std::vector<double> thresholds{0.01, 0.05, 0.1, 0.5};
};

struct StlsqSelection {
  StlsqResult best;
  int degree = 0;
  StlsqConfig config;
  double aic = 0.0;
};

/// Derivatives by finite differences, then the AIC-minimizing fit over the grid
/// (ties go to the earlier grid entry).
StlsqSelection stlsq_select(const Eigen::Ref<const Matrix>& X, double dt, const StlsqGrid& grid = {});

}  // namespace lanolem
