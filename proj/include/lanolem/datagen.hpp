#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "lanolem/coefficients.hpp"
#include "lanolem/inference.hpp"

namespace lanolem {

inline constexpr double kDefaultDt = 0.01;
inline constexpr int kTrainLength = 500;
inline constexpr int kTestLength = 100;

struct PolynomialODE {
  std::string name;
  CoefficientTable field;  // continuous-time truth
  Vector initial_condition;

  int dim() const noexcept { return field.dim; }
  int degree() const noexcept { return field.degree; }
  Vector operator()(const Eigen::Ref<const Vector>& x) const { return field.evaluate(x); }
};

/// Lorenz, Rossler, Halvorsen, Arneodo, BurkeShaw, NoseHoover (case-insensitive lookup).
const std::vector<std::string>& bundled_systems();

/// Throws InvalidArgument for unknown names. The initial condition is a point on the
/// attractor: a textbook starting point advanced 1000 RK4 steps at dt = 0.01.
PolynomialODE make_system(std::string_view name);

using VectorField = std::function<Vector(const Eigen::Ref<const Vector>&)>;

/// Classical RK4. Returns n_steps + 1 rows; row 0 is x0.
Matrix rk4(const VectorField& field, const Eigen::Ref<const Vector>& x0, double dt, int n_steps);
Matrix rk4(const PolynomialODE& system, const Eigen::Ref<const Vector>& x0, double dt, int n_steps);

struct NoiseSpec {
  double ratio_percent = 0.0;
  std::uint64_t seed = 0;
};

/// X + E with E Gaussian, rescaled so ||E||_F / ||X||_F = ratio / 100 exactly.
Matrix add_noise(const Eigen::Ref<const Matrix>& X, const NoiseSpec& spec);

struct Benchmark {
  std::string system;
  double noise_ratio = 0.0;
  std::uint64_t seed = 0;
  double dt = kDefaultDt;
  Matrix train;        // kTrainLength x d
  Matrix test;         // kTestLength x d
  Matrix clean_train;
  Matrix clean_test;
  CoefficientTable truth;
};

/// 600 samples at dt = 0.01 from the bundled initial condition, noise over all 600 rows
/// (or only the first 500 with clean_test), split 500 / 100.
Benchmark make_benchmark(const PolynomialODE& system, double noise_ratio, std::uint64_t seed,
                         bool clean_test = false);

struct MaskInterval {
  int start = 0;          // first row, inclusive
  int end = 0;            // last row, exclusive
  std::vector<int> dims;  // empty = every dimension
};

MissingMask mask_intervals(int n, int d, const std::vector<MaskInterval>& intervals);

}  // namespace lanolem
