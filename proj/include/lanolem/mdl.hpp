#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lanolem/em.hpp"

namespace lanolem {

inline constexpr double kFloatBits = 32.0;
inline constexpr double kMinResidualVariance = 1e-12;

struct MdlBreakdown {
  double data_cost_bits = 0.0;
  double A_bits = 0.0;
  double F_bits = 0.0;
  double b_bits = 0.0;
  double C_bits = 0.0;
  double u_bits = 0.0;
  double total_bits = 0.0;

  double model_cost_bits() const noexcept { return A_bits + F_bits + b_bits + C_bits + u_bits; }
};

/// Pooled Gaussian code length, in bits, of the residuals X - Xhat over the observed cells,
/// with mean and variance fitted by maximum likelihood (variance floored at 1e-12).
double data_cost(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Matrix>& Xhat, const MissingMask& mask = {});

/// Which reconstruction the data cost encodes the observations against.
enum class Reconstruction {
  smoothed,  // C s_hat(t) + u from the smoother
  one_step,  // C mu_hat(t) + u, the filter's prediction before row t is seen
};

struct ModelCostOptions {
  /// Count the support of A - I instead of A.
  bool count_a_minus_identity = false;
  Reconstruction reconstruction = Reconstruction::smoothed;
};

/// Block costs, log base 2, 32 bits per float:
///   A: |A| (2 log k + 32), F: |F| (log k + log k_phi + 32), b: |b| (log k + 32),
///   C: k d (log k + log d + 32), u: d (log d + 32).
/// data_cost_bits is left at zero and total_bits equals the model part.
MdlBreakdown model_cost(const ModelParams& theta, const ModelCostOptions& opts = {});

/// model_cost plus the data cost of the smoothed reconstruction C s_hat + u.
MdlBreakdown mdl_cost(const ModelParams& theta, const SmoothedTrajectory& smoothed, const Eigen::Ref<const Matrix>& X,
                      const MissingMask& mask = {}, const ModelCostOptions& opts = {});

/// model_cost plus the data cost of an explicit reconstruction.
MdlBreakdown mdl_cost(const ModelParams& theta, const Eigen::Ref<const Matrix>& reconstruction,
                      const Eigen::Ref<const Matrix>& X, const MissingMask& mask = {},
                      const ModelCostOptions& opts = {});

struct SelectionGrid {
  std::vector<int> d_phi{2, 3, 4};
  std::vector<double> lambda1{0.0, 1.0, 10.0, 50.0, 100.0, 500.0};
  std::vector<double> lambda2{0.0, 1.0, 10.0, 50.0, 100.0, 500.0};

  std::size_t size() const noexcept { return d_phi.size() * lambda1.size() * lambda2.size(); }
};

struct SelectionCell {
  int d_phi = 0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  bool ok = false;
  std::string error;  // set when the fit failed
  MdlBreakdown mdl;
  bool converged = false;
  int n_iters = 0;
  double objective = 0.0;
  double seconds = 0.0;
};

struct SelectionResult {
  std::vector<SelectionCell> cells;  // grid order: d_phi outermost, then lambda1, then lambda2
  int best = -1;                     // index into cells
  std::optional<FitReport> best_fit;
};

/// True when a is preferred to b: fewer bits, then smaller d_phi, larger lambda1, larger lambda2.
bool prefer_cell(const SelectionCell& a, const SelectionCell& b);

/// Fits every grid cell (on up to `jobs` threads) and keeps the MDL minimizer. Failed cells are
/// recorded and skipped; throws NumericalError if every cell fails. Results do not depend on jobs.
/// Observations reconstructed per opts.reconstruction for a finished fit.
Matrix reconstruction_for(const FitReport& rep, const Eigen::Ref<const Matrix>& X, const MissingMask& mask,
                          const FitOptions& fit_opts, const ModelCostOptions& opts);

SelectionResult model_select(const Eigen::Ref<const Matrix>& X, const MissingMask& mask, int k,
                             const SelectionGrid& grid, const FitOptions& opts, int jobs = 1,
                             const ModelCostOptions& cost_opts = {});

std::string selection_csv_header();
std::string to_csv(const SelectionCell& cell);

}  // namespace lanolem
