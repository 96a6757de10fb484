#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace lanolem {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct MonomialExponent {
  std::vector<int> exponents;

  int degree() const;
  bool operator==(const MonomialExponent&) const = default;
};

/// Ordered catalog of the monomials of degree 2..d_phi in k variables.
///
/// Order is graded lexicographic: every degree-2 monomial precedes every
/// degree-3 monomial, and within one degree exponent vectors are sorted in
/// descending lexicographic order, so for k=2: s1^2, s1 s2, s2^2.
///
/// Internally the basis also keeps the degree-0 and degree-1 monomials so that
/// evaluation, differentiation and Gaussian moments all run off one
/// precomputed recursion table with no allocation per call.
class PolyBasis {
 public:
  PolyBasis(int k, int d_phi);

  int k() const noexcept { return k_; }
  int d_phi() const noexcept { return d_phi_; }
  int k_phi() const noexcept { return static_cast<int>(table_.size()) - first_nonlinear_; }
  const std::vector<MonomialExponent>& monomials() const noexcept { return monomials_; }

  /// Values of every table monomial (degrees 0..d_phi) at s.
  void evaluate_table(const Eigen::Ref<const Vector>& s, Eigen::Ref<Vector> values) const;

  /// Raw moments E[m] of N(mu, sigma) for every table monomial.
  void gaussian_table(const Eigen::Ref<const Vector>& mu, const Eigen::Ref<const Matrix>& sigma,
                      Eigen::Ref<Vector> moments) const;

  int table_size() const noexcept { return static_cast<int>(table_.size()); }
  int first_nonlinear() const noexcept { return first_nonlinear_; }

  struct Lowered {
    int var;
    int power;  // exponent of var in the monomial
    int index;  // table index of the monomial with that exponent reduced by one
  };
  const std::vector<Lowered>& lowered(int table_index) const { return lowered_[table_index]; }

  bool operator==(const PolyBasis& other) const {
    return k_ == other.k_ && d_phi_ == other.d_phi_ && monomials_ == other.monomials_;
  }

 private:
  int k_;
  int d_phi_;
  int first_nonlinear_;
  std::vector<MonomialExponent> monomials_;
  std::vector<std::vector<int>> table_;
  std::vector<int> lead_var_;     // first variable with non-zero exponent
  std::vector<int> lead_parent_;  // table index of monomial / s_{lead_var}
  std::vector<std::vector<Lowered>> lowered_;
};

/// All exponent vectors of total degree `degree` in k variables, descending lex order.
std::vector<std::vector<int>> exponents_of_degree(int k, int degree);

PolyBasis enumerate_basis(int k, int d_phi);

Vector phi(const PolyBasis& basis, const Eigen::Ref<const Vector>& s);

/// (k_phi x k) matrix of d(monomial j)/d(s_i).
Matrix phi_jacobian(const PolyBasis& basis, const Eigen::Ref<const Vector>& s);

/// Exact raw moment E[prod_i x_i^{e_i}] of x ~ N(mu, sigma), via
/// E[x_a m(x)] = mu_a E[m] + sum_b sigma_ab E[dm/dx_b].
/// Valid for singular sigma. Throws InvalidArgument on non-square or asymmetric sigma.
double gaussian_moment(const Eigen::Ref<const Vector>& mu, const Eigen::Ref<const Matrix>& sigma,
                       const MonomialExponent& e);

/// gaussian_moment applied to each basis monomial; equals phi(basis, mu) when sigma = 0.
Vector expected_phi(const PolyBasis& basis, const Eigen::Ref<const Vector>& mu, const Eigen::Ref<const Matrix>& sigma);

/// Human-readable monomial, e.g. "x1^2 x3" for exponents (2,0,1) and prefix "x".
std::string monomial_label(const std::vector<int>& exponents, const std::string& prefix = "x");

}  // namespace lanolem
