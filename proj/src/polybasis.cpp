#include "lanolem/polybasis.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <numeric>

#include "lanolem/errors.hpp"

namespace lanolem {
namespace {

void fill_degree(int var, int remaining, std::vector<int>& current, std::vector<std::vector<int>>& out) {
  const int k = static_cast<int>(current.size());
  if (var == k - 1) {
    current[var] = remaining;
    out.push_back(current);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    current[var] = e;
    fill_degree(var + 1, remaining - e, current, out);
  }
  current[var] = 0;
}

void check_sigma(const Eigen::Ref<const Vector>& mu, const Eigen::Ref<const Matrix>& sigma) {
  if (sigma.rows() != sigma.cols()) throw InvalidArgument("gaussian moment: covariance must be square");
  if (sigma.rows() != mu.size()) throw InvalidArgument("gaussian moment: mean/covariance dimension mismatch");
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw InvalidArgument("gaussian moment: covariance is not symmetric");
  }
}

}  // namespace

int MonomialExponent::degree() const { return std::accumulate(exponents.begin(), exponents.end(), 0); }

std::vector<std::vector<int>> exponents_of_degree(int k, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> current(k, 0);
  fill_degree(0, degree, current, out);
  return out;
}

PolyBasis::PolyBasis(int k, int d_phi) : k_(k), d_phi_(d_phi) {
  if (k < 1) throw InvalidArgument("polynomial basis: k must be >= 1");
  if (d_phi < 2) throw InvalidArgument("polynomial basis: d_phi must be >= 2 (degree-1 terms live in A)");

  std::map<std::vector<int>, int> index_of;
  for (int deg = 0; deg <= d_phi; ++deg) {
    if (deg == 2) first_nonlinear_ = static_cast<int>(table_.size());
    for (auto& e : exponents_of_degree(k, deg)) {
      index_of.emplace(e, static_cast<int>(table_.size()));
      if (deg >= 2) monomials_.push_back(MonomialExponent{e});
      table_.push_back(std::move(e));
    }
  }

  const std::size_t n = table_.size();
  lead_var_.assign(n, -1);
  lead_parent_.assign(n, -1);
  lowered_.resize(n);
  for (std::size_t j = 1; j < n; ++j) {
    const auto& e = table_[j];
    for (int i = 0; i < k; ++i) {
      if (e[i] == 0) continue;
      auto reduced = e;
      --reduced[i];
      const int idx = index_of.at(reduced);
      if (lead_var_[j] < 0) {
        lead_var_[j] = i;
        lead_parent_[j] = idx;
      }
      lowered_[j].push_back(Lowered{i, e[i], idx});
    }
  }
}

void PolyBasis::evaluate_table(const Eigen::Ref<const Vector>& s, Eigen::Ref<Vector> values) const {
  values[0] = 1.0;
  for (std::size_t j = 1; j < table_.size(); ++j) values[j] = s[lead_var_[j]] * values[lead_parent_[j]];
}

void PolyBasis::gaussian_table(const Eigen::Ref<const Vector>& mu, const Eigen::Ref<const Matrix>& sigma,
                               Eigen::Ref<Vector> moments) const {
  // E[x_a m] = mu_a E[m] + sum_b sigma_ab * m_b * E[m / x_b], with m = e / x_a.
  moments[0] = 1.0;
  for (std::size_t j = 1; j < table_.size(); ++j) {
    const int a = lead_var_[j];
    const int parent = lead_parent_[j];
    double value = mu[a] * moments[parent];
    for (const auto& low : lowered_[parent]) value += sigma(a, low.var) * low.power * moments[low.index];
    moments[j] = value;
  }
}

PolyBasis enumerate_basis(int k, int d_phi) { return PolyBasis(k, d_phi); }

Vector phi(const PolyBasis& basis, const Eigen::Ref<const Vector>& s) {
  if (s.size() != basis.k()) throw InvalidArgument("phi: state has wrong dimension");
  Vector table(basis.table_size());
  basis.evaluate_table(s, table);
  return table.tail(basis.k_phi());
}

Matrix phi_jacobian(const PolyBasis& basis, const Eigen::Ref<const Vector>& s) {
  if (s.size() != basis.k()) throw InvalidArgument("phi_jacobian: state has wrong dimension");
  Vector table(basis.table_size());
  basis.evaluate_table(s, table);
  Matrix jac = Matrix::Zero(basis.k_phi(), basis.k());
  for (int j = 0; j < basis.k_phi(); ++j) {
    for (const auto& low : basis.lowered(basis.first_nonlinear() + j)) {
      jac(j, low.var) = low.power * table[low.index];
    }
  }
  return jac;
}

double gaussian_moment(const Eigen::Ref<const Vector>& mu, const Eigen::Ref<const Matrix>& sigma,
                       const MonomialExponent& e) {
  check_sigma(mu, sigma);
  if (static_cast<Eigen::Index>(e.exponents.size()) != mu.size()) {
    throw InvalidArgument("gaussian moment: exponent vector has wrong length");
  }
  std::map<std::vector<int>, double> memo;
  std::function<double(const std::vector<int>&)> moment = [&](const std::vector<int>& ex) -> double {
    int a = -1;
    for (std::size_t i = 0; i < ex.size(); ++i) {
      if (ex[i] > 0) {
        a = static_cast<int>(i);
        break;
      }
    }
    if (a < 0) return 1.0;
    if (auto it = memo.find(ex); it != memo.end()) return it->second;
    auto m = ex;
    --m[a];
    double value = mu[a] * moment(m);
    for (std::size_t b = 0; b < m.size(); ++b) {
      if (m[b] == 0 || sigma(a, b) == 0.0) continue;
      auto lowered = m;
      --lowered[b];
      value += sigma(a, b) * m[b] * moment(lowered);
    }
    memo.emplace(ex, value);
    return value;
  };
  return moment(e.exponents);
}

Vector expected_phi(const PolyBasis& basis, const Eigen::Ref<const Vector>& mu, const Eigen::Ref<const Matrix>& sigma) {
  check_sigma(mu, sigma);
  if (mu.size() != basis.k()) throw InvalidArgument("expected_phi: mean has wrong dimension");
  Vector table(basis.table_size());
  basis.gaussian_table(mu, sigma, table);
  return table.tail(basis.k_phi());
}

std::string monomial_label(const std::vector<int>& exponents, const std::string& prefix) {
  std::string out;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    if (exponents[i] == 0) continue;
    if (!out.empty()) out += ' ';
    out += prefix + std::to_string(i + 1);
    if (exponents[i] > 1) out += '^' + std::to_string(exponents[i]);
  }
  return out.empty() ? "1" : out;
}

}  // namespace lanolem
