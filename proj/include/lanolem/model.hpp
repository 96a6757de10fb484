#pragma once

#include <cstdint>
#include <optional>

#include "lanolem/polybasis.hpp"

namespace lanolem {

/// Eigenvalue floor applied to the state and observation noise covariances.
inline constexpr double kCovarianceFloor = 1e-10;

/// Parameter set of the latent polynomial dynamical system
///   s(t+1) = A s(t) + F phi(s(t)) + b + N(0, Gamma)
///   x(t)   = C s(t) + u + N(0, R)
struct ModelParams {
  PolyBasis basis;
  Matrix A;      // k x k
  Matrix F;      // k x k_phi
  Vector b;      // k
  Matrix C;      // d x k
  Vector u;      // d
  Matrix Gamma;  // k x k
  Matrix R;      // d x d

  int k() const noexcept { return basis.k(); }
  int d() const noexcept { return static_cast<int>(C.rows()); }
  int k_phi() const noexcept { return basis.k_phi(); }

  /// [A | F], the block regularized toward the shift target.
  Matrix theta_s() const;
  void set_theta_s(const Eigen::Ref<const Matrix>& theta);

  /// Throws InvalidArgument on inconsistent shapes or asymmetric covariances.
  void validate() const;

  /// A = I, F = 0, b = 0, C = I (d = k), u = 0, Gamma = R = I.
  static ModelParams identity(const PolyBasis& basis);
};

/// The matrix [I_k | 0] that [A | F] is shrunk toward.
class ShiftTarget {
 public:
  ShiftTarget(int k, int k_phi);
  const Matrix& matrix() const noexcept { return pad_; }
  int k() const noexcept { return static_cast<int>(pad_.rows()); }
  int cols() const noexcept { return static_cast<int>(pad_.cols()); }

 private:
  Matrix pad_;
};

struct Hyperparams {
  int k = 1;
  int d_phi = 2;
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  void validate() const;
};

Vector step_mean(const ModelParams& theta, const Eigen::Ref<const Vector>& s);
Vector observe(const ModelParams& theta, const Eigen::Ref<const Vector>& s);

/// A + F * dphi/ds evaluated at s.
Matrix transition_jacobian(const ModelParams& theta, const Eigen::Ref<const Vector>& s);

struct Simulation {
  Matrix states;        // n x k, row 0 is s0
  Matrix observations;  // n x d
};

/// Rolls the model forward for n rows starting at s0. With a seed, state and
/// observation noise are drawn from N(0, Gamma) and N(0, R).
/// Throws NumericalError (with the step) if a state becomes non-finite.
Simulation simulate(const ModelParams& theta, const Eigen::Ref<const Vector>& s0, int n,
                    std::optional<std::uint64_t> noise_seed = std::nullopt);

/// Symmetrize and clamp eigenvalues from below.
Matrix floor_covariance(const Eigen::Ref<const Matrix>& m, double floor = kCovarianceFloor);

}  // namespace lanolem
