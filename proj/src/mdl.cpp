#include "lanolem/mdl.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <thread>

#include "lanolem/errors.hpp"
#include "lanolem/log.hpp"

namespace lanolem {

double data_cost(const Eigen::Ref<const Matrix>& X, const Eigen::Ref<const Matrix>& Xhat, const MissingMask& mask) {
  if (X.rows() != Xhat.rows() || X.cols() != Xhat.cols()) throw InvalidArgument("data_cost: shapes differ");
  double sum = 0.0;
  long count = 0;
  for (Eigen::Index t = 0; t < X.rows(); ++t) {
    for (Eigen::Index i = 0; i < X.cols(); ++i) {
      if (is_missing(mask, t, i)) continue;
      sum += X(t, i) - Xhat(t, i);
      ++count;
    }
  }
  if (count == 0) return 0.0;
  const double mu = sum / count;
  double sq = 0.0;
  for (Eigen::Index t = 0; t < X.rows(); ++t) {
    for (Eigen::Index i = 0; i < X.cols(); ++i) {
      if (is_missing(mask, t, i)) continue;
      const double e = X(t, i) - Xhat(t, i) - mu;
      sq += e * e;
    }
  }
  const double var = std::max(sq / count, kMinResidualVariance);
  // sum of -log2 N(e; mu, var) with e - mu summing to sq
  const double nats = 0.5 * count * std::log(2.0 * std::numbers::pi * var) + 0.5 * sq / var;
  return nats / std::numbers::ln2;
}

MdlBreakdown model_cost(const ModelParams& theta, const ModelCostOptions& opts) {
  const double k = theta.k();
  const double d = theta.d();
  const double k_phi = theta.k_phi();
  auto support = [](const Matrix& m) { return static_cast<double>((m.array() != 0.0).count()); };
  const Matrix a = opts.count_a_minus_identity ? Matrix(theta.A - Matrix::Identity(theta.k(), theta.k())) : theta.A;

  MdlBreakdown out;
  out.A_bits = support(a) * (2.0 * std::log2(k) + kFloatBits);
  out.F_bits = support(theta.F) * (std::log2(k) + std::log2(k_phi) + kFloatBits);
  out.b_bits = support(theta.b) * (std::log2(k) + kFloatBits);
  out.C_bits = k * d * (std::log2(k) + std::log2(d) + kFloatBits);
  out.u_bits = d * (std::log2(d) + kFloatBits);
  out.total_bits = out.model_cost_bits();
  return out;
}

MdlBreakdown mdl_cost(const ModelParams& theta, const SmoothedTrajectory& smoothed, const Eigen::Ref<const Matrix>& X,
                      const MissingMask& mask, const ModelCostOptions& opts) {
  if (smoothed.size() != X.rows()) throw InvalidArgument("mdl_cost: trajectory length does not match data");
  Matrix fitted(X.rows(), X.cols());
  for (int t = 0; t < smoothed.size(); ++t) fitted.row(t) = observe(theta, smoothed.mean[t]).transpose();
  return mdl_cost(theta, fitted, X, mask, opts);
}

MdlBreakdown mdl_cost(const ModelParams& theta, const Eigen::Ref<const Matrix>& reconstruction,
                      const Eigen::Ref<const Matrix>& X, const MissingMask& mask, const ModelCostOptions& opts) {
  MdlBreakdown out = model_cost(theta, opts);
  out.data_cost_bits = data_cost(X, reconstruction, mask);
  out.total_bits = out.data_cost_bits + out.model_cost_bits();
  return out;
}

Matrix reconstruction_for(const FitReport& rep, const Eigen::Ref<const Matrix>& X, const MissingMask& mask,
                          const FitOptions& fit_opts, const ModelCostOptions& opts) {
  const ModelParams& theta = rep.theta;
  Matrix out(X.rows(), X.cols());
  if (opts.reconstruction == Reconstruction::smoothed) {
    for (int t = 0; t < rep.smoothed.size(); ++t) out.row(t) = observe(theta, rep.smoothed.mean[t]).transpose();
    return out;
  }
  const ForwardPass fwd = ekf_forward(theta, X, mask, prior_mean_for(fit_opts, theta, X, mask),
                                      prior_cov_for(fit_opts, theta.k()));
  for (int t = 0; t < fwd.size(); ++t) out.row(t) = observe(theta, fwd.predicted_mean[t]).transpose();
  return out;
}

bool prefer_cell(const SelectionCell& a, const SelectionCell& b) {
  if (a.ok != b.ok) return a.ok;
  if (a.mdl.total_bits != b.mdl.total_bits) return a.mdl.total_bits < b.mdl.total_bits;
  if (a.d_phi != b.d_phi) return a.d_phi < b.d_phi;
  if (a.lambda1 != b.lambda1) return a.lambda1 > b.lambda1;
  return a.lambda2 > b.lambda2;
}

SelectionResult model_select(const Eigen::Ref<const Matrix>& X, const MissingMask& mask, int k,
                             const SelectionGrid& grid, const FitOptions& opts, int jobs,
                             const ModelCostOptions& cost_opts) {
  if (grid.size() == 0) throw InvalidArgument("model_select: empty grid");
  if (jobs < 1) throw InvalidArgument("model_select: jobs must be >= 1");

  SelectionResult result;
  for (int d_phi : grid.d_phi)
    for (double l1 : grid.lambda1)
      for (double l2 : grid.lambda2) {
        SelectionCell cell;
        cell.d_phi = d_phi;
        cell.lambda1 = l1;
        cell.lambda2 = l2;
        result.cells.push_back(std::move(cell));
      }

  // validate hyperparameters up front so usage errors are not reported as failed cells
  for (const auto& cell : result.cells) Hyperparams{k, cell.d_phi, cell.lambda1, cell.lambda2}.validate();

  const Matrix data = X;
  std::vector<std::optional<FitReport>> fits(result.cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < result.cells.size(); i = next++) {
      SelectionCell& cell = result.cells[i];
      const auto start = std::chrono::steady_clock::now();
      try {
        FitReport rep = fit(data, mask, Hyperparams{k, cell.d_phi, cell.lambda1, cell.lambda2}, opts);
        cell.mdl = mdl_cost(rep.theta, reconstruction_for(rep, data, mask, opts, cost_opts), data, mask, cost_opts);
        cell.converged = rep.converged;
        cell.n_iters = rep.n_iters;
        cell.objective = rep.objective_trace[rep.best_iteration];
        cell.ok = std::isfinite(cell.mdl.total_bits);
        if (!cell.ok) cell.error = "non-finite description length";
        fits[i] = std::move(rep);
      } catch (const NumericalError& e) {
        cell.error = e.what();
      }
      cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      log::debug("select d_phi=", cell.d_phi, " lambda1=", cell.lambda1, " lambda2=", cell.lambda2,
                 cell.ok ? " bits=" + std::to_string(cell.mdl.total_bits) : " failed: " + cell.error);
    }
  };
  const int n_threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), result.cells.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < result.cells.size(); ++i) {
    if (!result.cells[i].ok) continue;
    if (result.best < 0 || prefer_cell(result.cells[i], result.cells[result.best])) result.best = static_cast<int>(i);
  }
  if (result.best < 0) throw NumericalError("model_select", -1, "every grid cell failed");
  result.best_fit = std::move(fits[result.best]);
  return result;
}

std::string selection_csv_header() {
  return "d_phi,lambda1,lambda2,ok,converged,n_iters,objective,data_bits,A_bits,F_bits,b_bits,C_bits,u_bits,total_bits,"
         "error";
}

std::string to_csv(const SelectionCell& cell) {
  std::ostringstream out;
  out << std::setprecision(12) << cell.d_phi << ',' << cell.lambda1 << ',' << cell.lambda2 << ',' << (cell.ok ? 1 : 0)
      << ',' << (cell.converged ? 1 : 0) << ',' << cell.n_iters << ',' << cell.objective << ','
      << cell.mdl.data_cost_bits << ',' << cell.mdl.A_bits << ',' << cell.mdl.F_bits << ',' << cell.mdl.b_bits << ','
      << cell.mdl.C_bits << ',' << cell.mdl.u_bits << ',' << cell.mdl.total_bits << ',';
  // errors may contain commas; keep the field quoted
  std::string msg = cell.error;
  std::string quoted;
  for (char c : msg) quoted += (c == '"') ? std::string("\"\"") : std::string(1, c);
  out << '"' << quoted << '"';
  return out.str();
}

}  // namespace lanolem
