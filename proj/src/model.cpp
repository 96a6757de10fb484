#include "lanolem/model.hpp"

#include <cmath>
#include <random>

#include "lanolem/errors.hpp"

namespace lanolem {
namespace {

void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    throw InvalidArgument(std::string("model: ") + name + " has shape " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                          std::to_string(cols));
  }
}

Matrix cholesky_factor(const Matrix& cov) {
  // Gamma/R may sit at the eigenvalue floor; go through the eigendecomposition
  // so that PSD-but-singular matrices still yield a valid square root.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (cov + cov.transpose()));
  Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

}  // namespace

Matrix ModelParams::theta_s() const {
  Matrix theta(k(), k() + k_phi());
  theta << A, F;
  return theta;
}

void ModelParams::set_theta_s(const Eigen::Ref<const Matrix>& theta) {
  require_shape(theta, k(), k() + k_phi(), "Theta_s");
  A = theta.leftCols(k());
  F = theta.rightCols(k_phi());
}

void ModelParams::validate() const {
  const int kk = k();
  const int dd = d();
  require_shape(A, kk, kk, "A");
  require_shape(F, kk, k_phi(), "F");
  require_shape(b, kk, 1, "b");
  require_shape(C, dd, kk, "C");
  require_shape(u, dd, 1, "u");
  require_shape(Gamma, kk, kk, "Gamma");
  require_shape(R, dd, dd, "R");
  if ((Gamma - Gamma.transpose()).cwiseAbs().maxCoeff() > 1e-9) throw InvalidArgument("model: Gamma not symmetric");
  if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-9) throw InvalidArgument("model: R not symmetric");
}

ModelParams ModelParams::identity(const PolyBasis& basis) {
  const int k = basis.k();
  return ModelParams{basis,
                     Matrix::Identity(k, k),
                     Matrix::Zero(k, basis.k_phi()),
                     Vector::Zero(k),
                     Matrix::Identity(k, k),
                     Vector::Zero(k),
                     Matrix::Identity(k, k),
                     Matrix::Identity(k, k)};
}

ShiftTarget::ShiftTarget(int k, int k_phi) : pad_(Matrix::Zero(k, k + k_phi)) {
  pad_.leftCols(k).setIdentity();
}

void Hyperparams::validate() const {
  if (k < 1) throw InvalidArgument("hyperparameters: k must be >= 1");
  if (d_phi < 2 || d_phi > 4) throw InvalidArgument("hyperparameters: d_phi must be in [2, 4]");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw InvalidArgument("hyperparameters: lambdas must be >= 0");
}

Vector step_mean(const ModelParams& theta, const Eigen::Ref<const Vector>& s) {
  return theta.A * s + theta.F * phi(theta.basis, s) + theta.b;
}

Vector observe(const ModelParams& theta, const Eigen::Ref<const Vector>& s) { return theta.C * s + theta.u; }

Matrix transition_jacobian(const ModelParams& theta, const Eigen::Ref<const Vector>& s) {
  return theta.A + theta.F * phi_jacobian(theta.basis, s);
}

Simulation simulate(const ModelParams& theta, const Eigen::Ref<const Vector>& s0, int n,
                    std::optional<std::uint64_t> noise_seed) {
  if (n < 1) throw InvalidArgument("simulate: n must be >= 1");
  if (s0.size() != theta.k()) throw InvalidArgument("simulate: initial state has wrong dimension");

  Simulation out{Matrix(n, theta.k()), Matrix(n, theta.d())};
  std::mt19937_64 rng(noise_seed.value_or(0));
  std::normal_distribution<double> normal(0.0, 1.0);
  const Matrix state_root = noise_seed ? cholesky_factor(theta.Gamma) : Matrix();
  const Matrix obs_root = noise_seed ? cholesky_factor(theta.R) : Matrix();
  auto draw = [&](const Matrix& root) {
    Vector z(root.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
    return Vector(root * z);
  };

  Vector s = s0;
  for (int t = 0; t < n; ++t) {
    if (t > 0) {
      s = step_mean(theta, s);
      if (noise_seed) s += draw(state_root);
    }
    if (!s.allFinite()) throw NumericalError("simulate", t, "state diverged");
    out.states.row(t) = s.transpose();
    Vector y = observe(theta, s);
    if (noise_seed) y += draw(obs_root);
    out.observations.row(t) = y.transpose();
  }
  return out;
}

Matrix floor_covariance(const Eigen::Ref<const Matrix>& m, double floor) {
  Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalError("covariance floor", -1, "eigendecomposition failed");
  if (eig.eigenvalues().minCoeff() >= floor) return sym;
  Vector clamped = eig.eigenvalues().cwiseMax(floor);
  Matrix out = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace lanolem
