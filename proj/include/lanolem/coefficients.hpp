#pragma once

#include <string>
#include <vector>

#include "lanolem/polybasis.hpp"

namespace lanolem {

/// Continuous-time polynomial vector field over the columns
/// [1 | x_1..x_d | monomials of degree 2..degree], monomials in canonical PolyBasis order.
struct CoefficientTable {
  int dim = 0;
  int degree = 1;
  Matrix values;  // dim x column_count(dim, degree)

  static CoefficientTable zeros(int dim, int degree);

  /// Exponent vectors of all columns, degree 0 first.
  static std::vector<std::vector<int>> column_exponents(int dim, int degree);
  static int column_count(int dim, int degree);

  int column_of(const std::vector<int>& exponents) const;
  double& at(int row, const std::vector<int>& exponents);
  double at(int row, const std::vector<int>& exponents) const;

  /// Same field expressed with zero columns up to `new_degree` (>= degree).
  CoefficientTable padded_to(int new_degree) const;

  Vector evaluate(const Eigen::Ref<const Vector>& x) const;

  std::vector<std::string> column_labels(const std::string& prefix = "x") const;
};

}  // namespace lanolem
