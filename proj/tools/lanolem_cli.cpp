#include <cmath>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lanolem/datagen.hpp"
#include "lanolem/errors.hpp"
#include "lanolem/eval.hpp"
#include "lanolem/io.hpp"
#include "lanolem/log.hpp"
#include "lanolem/mdl.hpp"
#include "lanolem/stlsq.hpp"

namespace fs = std::filesystem;
using namespace lanolem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

struct Common {
  bool no_banner = false;
};

std::string banner(const Common& common, const std::string& what) {
  if (common.no_banner) return {};
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return "lanolem " + what + " " + stamp;
}

std::string sibling(const std::string& path, const std::string& name) {
  fs::path p(path);
  return (p.has_parent_path() ? p.parent_path() / name : fs::path(name)).string();
}

/// Loads a series and its mask. Empty fields are missing; NaN cells must be covered by the mask.
Series load_data(const std::string& data_path, const std::string& mask_path) {
  Series s = read_series(data_path);
  if (!mask_path.empty()) {
    const MissingMask extra = read_mask(mask_path, s.rows(), s.cols());
    s.mask = s.mask || extra;
  }
  for (int r = 0; r < s.rows(); ++r) {
    for (int i = 0; i < s.cols(); ++i) {
      if (!s.mask(r, i) && !std::isfinite(s.X(r, i))) {
        throw IoError(data_path + ": non-finite value at data row " + std::to_string(r + 1) + ", column " +
                      std::to_string(i + 1) + " (mark it missing with an empty field or --mask)");
      }
      if (s.mask(r, i)) s.X(r, i) = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return s;
}

double infer_dt(const Series& s) {
  if (s.rows() < 2) return kDefaultDt;
  const double dt = s.t[1] - s.t[0];
  return dt > 0.0 ? dt : kDefaultDt;
}

InitMode parse_init(const std::string& name) {
  if (name == "identity") return InitMode::identity_observed;
  if (name == "svd") return InitMode::svd;
  if (name == "smoothed") return InitMode::smoothed_regression;
  throw InvalidArgument("unknown --init '" + name + "'");
}

SparseSolver parse_solver(const std::string& name) {
  if (name == "ista") return SparseSolver::ista;
  if (name == "accelerated") return SparseSolver::accelerated;
  throw InvalidArgument("unknown --solver '" + name + "'");
}

struct FitFlags {
  std::string data, mask, out, states, init_model, init, solver = "accelerated";
  int k = 0;
  int d_phi = 2;
  double lambda1 = 0.0, lambda2 = 0.0;
  bool freeze_c = false, free_c = false;
  unsigned long long seed = 0;
  int max_iters = 100;
  int restarts = 1;
};

FitOptions fit_options_from(const FitFlags& f, int k, int d) {
  FitOptions opts = benchmark_options(k, d);
  if (!f.init.empty()) opts.init_mode = parse_init(f.init);
  opts.solver = parse_solver(f.solver);
  if (f.freeze_c) opts.freeze_c = true;
  if (f.free_c) opts.freeze_c = false;
  opts.seed = f.seed;
  opts.max_outer_iters = f.max_iters;
  return opts;
}

Vector prior_mean(const FitOptions& opts, const ModelParams& theta, const Series& s) {
  return prior_mean_for(opts, theta, s.X, s.mask);
}

void write_states(const std::string& path, const FitReport& rep, const Series& s, const std::string& head) {
  Matrix states(rep.smoothed.size(), rep.theta.k());
  for (int t = 0; t < rep.smoothed.size(); ++t) states.row(t) = rep.smoothed.mean[t].transpose();
  Series out = make_series(states, 0.0, 1.0);
  out.t = s.t;
  std::vector<std::string> names;
  for (int j = 0; j < rep.theta.k(); ++j) names.push_back("s" + std::to_string(j + 1));
  write_series(path, out, head, names);
}

int cmd_simulate(const Common& common, const std::string& system, double noise, unsigned long long seed,
                 const std::string& prefix, bool clean_test) {
  const PolynomialODE sys = make_system(system);
  const Benchmark bench = make_benchmark(sys, noise, seed, clean_test);
  const double t_train = bench.dt * static_cast<double>(bench.train.rows());
  write_series(prefix + "train.csv", make_series(bench.train, 0.0, bench.dt), banner(common, "simulate train"));
  write_series(prefix + "test.csv", make_series(bench.test, t_train, bench.dt), banner(common, "simulate test"));
  save_truth(prefix + "truth.json", TruthFile{sys.name, bench.dt, noise, seed, bench.truth});
  log::info("simulate: wrote ", prefix, "{train.csv,test.csv,truth.json}");
  return kExitOk;
}

int cmd_fit(const Common& common, const FitFlags& f) {
  const Series s = load_data(f.data, f.mask);
  const int d = s.cols();
  Hyperparams hyper{f.k > 0 ? f.k : d, f.d_phi, f.lambda1, f.lambda2};
  FitOptions opts = fit_options_from(f, hyper.k, d);
  if (!f.init_model.empty()) {
    ModelFile init = load_model(f.init_model);
    hyper.k = init.theta.k();
    hyper.d_phi = init.theta.basis.d_phi();
    opts.initial = init.theta;
  }
  hyper.validate();
  const FitReport rep = fit_restarts(s.X, s.mask, hyper, opts, f.restarts);
  log::info("fit: ", rep.n_iters, " iterations, converged=", rep.converged, ", best iteration ", rep.best_iteration);
  FitMeta meta{hyper.lambda1, hyper.lambda2, rep.n_iters, rep.objective_trace.at(rep.best_iteration), std::nullopt};
  save_model(f.out, rep.theta, meta);
  write_states(f.states.empty() ? sibling(f.out, "states.csv") : f.states, rep, s, banner(common, "fit states"));
  return kExitOk;
}

int cmd_select(const Common& common, const FitFlags& f, const SelectionGrid& grid, int jobs,
               const std::string& table_path, bool one_step) {
  const Series s = load_data(f.data, f.mask);
  const int d = s.cols();
  const int k = f.k > 0 ? f.k : d;
  const FitOptions opts = fit_options_from(f, k, d);
  ModelCostOptions cost;
  if (one_step) cost.reconstruction = Reconstruction::one_step;
  const SelectionResult sel = model_select(s.X, s.mask, k, grid, opts, jobs, cost);
  const SelectionCell& best = sel.cells[sel.best];
  log::info("select: best d_phi=", best.d_phi, " lambda1=", best.lambda1, " lambda2=", best.lambda2, " bits=",
            best.mdl.total_bits);

  std::ostringstream table;
  const std::string head = banner(common, "select");
  if (!head.empty()) table << "# " << head << '\n';
  table << selection_csv_header() << '\n';
  for (const auto& cell : sel.cells) table << to_csv(cell) << '\n';
  write_text(table_path.empty() ? sibling(f.out, "selection.csv") : table_path, table.str());

  const FitReport& rep = *sel.best_fit;
  FitMeta meta{best.lambda1, best.lambda2, rep.n_iters, rep.objective_trace.at(rep.best_iteration),
               best.mdl.total_bits};
  save_model(f.out, rep.theta, meta);
  write_states(f.states.empty() ? sibling(f.out, "states.csv") : f.states, rep, s, banner(common, "select states"));
  return kExitOk;
}

/// Filtered state after the training series under the model file.
FilterState train_state(const ModelParams& theta, const Series& train) {
  const FitOptions opts = benchmark_options(theta.k(), theta.d());
  return final_filter_state(theta, train.X, train.mask, prior_mean(opts, theta, train),
                            prior_cov_for(opts, theta.k()));
}

int cmd_predict(const Common& common, const std::string& model_path, const std::string& train_path,
                const std::string& test_path, const std::string& mode, int horizon, const std::string& out) {
  const ModelFile model = load_model(model_path);
  const Series train = load_data(train_path, "");
  const FilterState state = train_state(model.theta, train);
  const double dt = infer_dt(train);
  const double t0 = train.t[train.rows() - 1] + dt;

  Matrix predicted;
  if (mode == "one-step") {
    if (test_path.empty()) throw InvalidArgument("predict: one-step mode needs --test");
    const Series test = load_data(test_path, "");
    predicted = one_step_predictions(model.theta, state, test.X, test.mask);
    if (horizon > 0 && horizon < predicted.rows()) predicted.conservativeResize(horizon, Eigen::NoChange);
  } else if (mode == "forecast") {
    int h = horizon;
    if (h <= 0) {
      if (test_path.empty()) throw InvalidArgument("predict: forecast needs --horizon or --test");
      h = load_data(test_path, "").rows();
    }
    // The rollout starts from the predicted state of the first step after training.
    predicted = forecast(model.theta, step_mean(model.theta, state.mean), h);
  } else {
    throw InvalidArgument("predict: unknown --mode '" + mode + "'");
  }
  write_series(out, make_series(predicted, t0, dt), banner(common, "predict " + mode));
  return kExitOk;
}

int cmd_eval(const std::string& model_path, const std::string& truth_path, const std::string& train_path,
             const std::string& test_path, const std::string& method, bool header, const std::string& out) {
  const TruthFile truth = load_truth(truth_path);
  const Series train = load_data(train_path, "");
  const Series test = load_data(test_path, "");
  EvalRow row{truth.system, truth.noise_ratio, truth.seed, method, 0.0, 0.0};
  if (method == "stlsq") {
    const StlsqSelection sel = stlsq_select(train.X, truth.dt);
    row.coefficient_error = coefficient_error(truth.table, sel.best.table);
    row.mse = masked_mse(euler_one_step(sel.best.table, truth.dt, train.X.row(train.rows() - 1).transpose(), test.X),
                         test.X, test.mask);
  } else {
    if (model_path.empty()) throw InvalidArgument("eval: --model is required unless --method stlsq");
    const ModelFile model = load_model(model_path);
    row.coefficient_error = coefficient_error(truth.table, observed_field(model.theta, truth.dt));
    row.mse = one_step_mse(model.theta, train_state(model.theta, train), test.X, test.mask);
  }
  std::ostringstream text;
  if (header) text << eval_csv_header() << '\n';
  text << to_csv(row) << '\n';
  if (out.empty()) {
    std::cout << text.str();
  } else {
    write_text(out, text.str());
  }
  return kExitOk;
}

int cmd_interp(const Common& common, const std::string& model_path, const std::string& data_path,
               const std::string& mask_path, const std::string& out) {
  const ModelFile model = load_model(model_path);
  const Series s = load_data(data_path, mask_path);
  const FitOptions opts = benchmark_options(model.theta.k(), model.theta.d());
  const Matrix filled = interpolate(model.theta, s.X, s.mask, prior_mean(opts, model.theta, s),
                                    prior_cov_for(opts, model.theta.k()));
  Series result = make_series(filled, 0.0, 1.0);
  result.t = s.t;
  write_series(out, result, banner(common, "interp"));
  return kExitOk;
}

void add_fit_flags(CLI::App* cmd, FitFlags& f, bool with_lambdas) {
  cmd->add_option("--data", f.data, "Training CSV (t,x1..xd)")->required();
  cmd->add_option("--mask", f.mask, "Mask CSV in the same layout; nonzero marks a missing cell");
  cmd->add_option("--k", f.k, "Latent dimension (default: d)");
  cmd->add_flag("--freeze-c", f.freeze_c, "Hold C at its initial value");
  cmd->add_flag("--free-c", f.free_c, "Re-estimate C every iteration");
  cmd->add_option("--seed", f.seed, "Seed for restarts");
  cmd->add_option("--out", f.out, "Model JSON output")->required();
  cmd->add_option("--states", f.states, "Smoothed states CSV (default: states.csv next to --out)");
  cmd->add_option("--init", f.init, "identity | svd | smoothed");
  cmd->add_option("--solver", f.solver, "ista | accelerated");
  cmd->add_option("--max-iters", f.max_iters, "Outer EM iterations")->check(CLI::NonNegativeNumber);
  if (with_lambdas) {
    cmd->add_option("--d-phi", f.d_phi, "Polynomial order")->check(CLI::PositiveNumber);
    cmd->add_option("--lambda1", f.lambda1, "L1 weight")->check(CLI::NonNegativeNumber);
    cmd->add_option("--lambda2", f.lambda2, "L2 weight")->check(CLI::NonNegativeNumber);
    cmd->add_option("--restarts", f.restarts, "Perturbed restarts")->check(CLI::PositiveNumber);
    cmd->add_option("--init-model", f.init_model, "Start from this model file instead of initializing");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent non-linear dynamical system identification"};
  app.require_subcommand(1);
  Common common;
  app.add_flag("--no-banner", common.no_banner, "Omit the timestamp header line from outputs");

  std::string system, prefix;
  double noise = 0.0;
  unsigned long long seed = 0;
  bool clean_test = false;
  auto* sim = app.add_subcommand("simulate", "Generate train/test series and the true coefficients");
  sim->add_option("--system", system, "Bundled system name")->required();
  sim->add_option("--noise-ratio", noise, "Noise ratio in percent")->check(CLI::NonNegativeNumber);
  sim->add_option("--seed", seed, "Noise seed");
  sim->add_option("--out-prefix", prefix, "Prefix for train.csv, test.csv, truth.json");
  sim->add_flag("--clean-test", clean_test, "Leave the test segment noise-free");

  FitFlags fit_flags;
  auto* fit_cmd = app.add_subcommand("fit", "Fit one model with fixed hyperparameters");
  add_fit_flags(fit_cmd, fit_flags, true);

  FitFlags sel_flags;
  SelectionGrid grid;
  bool grid_defaults = false, one_step = false;
  int jobs = 1;
  std::string table_path;
  auto* sel = app.add_subcommand("select", "MDL model selection over a (d_phi, lambda1, lambda2) grid");
  add_fit_flags(sel, sel_flags, false);
  sel->add_flag("--grid-defaults", grid_defaults, "Use the default 3x6x6 grid (ignores the grid lists)");
  sel->add_option("--d-phi-grid", grid.d_phi, "Polynomial orders")->delimiter(',');
  sel->add_option("--lambda1-grid", grid.lambda1, "L1 weights")->delimiter(',');
  sel->add_option("--lambda2-grid", grid.lambda2, "L2 weights")->delimiter(',');
  sel->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  sel->add_option("--table", table_path, "Selection table CSV (default: selection.csv next to --out)");
  sel->add_flag("--one-step-cost", one_step, "Encode data against one-step predictions instead of smoothed states");

  std::string model_path, train_path, test_path, mode = "one-step", out;
  int horizon = 0;
  auto* pred = app.add_subcommand("predict", "One-step predictions or a free-running forecast after the training data");
  pred->add_option("--model", model_path)->required();
  pred->add_option("--train", train_path, "Series the filter runs over first")->required();
  pred->add_option("--test", test_path, "Series to predict (one-step) or to size the horizon");
  pred->add_option("--mode", mode, "one-step | forecast");
  pred->add_option("--horizon", horizon, "Rows to emit (default: length of --test)");
  pred->add_option("--out", out)->required();

  std::string truth_path, method = "lanolem", eval_out;
  bool header = false;
  auto* ev = app.add_subcommand("eval", "Coefficient error and one-step MSE as one CSV row");
  ev->add_option("--model", model_path);
  ev->add_option("--truth", truth_path)->required();
  ev->add_option("--train", train_path)->required();
  ev->add_option("--test", test_path)->required();
  ev->add_option("--method", method, "lanolem | stlsq (stlsq fits the baseline on --train)");
  ev->add_flag("--header", header, "Print the CSV header first");
  ev->add_option("--out", eval_out, "Write the row here instead of stdout");

  std::string data_path, mask_path;
  auto* ip = app.add_subcommand("interp", "Fill masked cells with the smoothed reconstruction");
  ip->add_option("--model", model_path)->required();
  ip->add_option("--data", data_path)->required();
  ip->add_option("--mask", mask_path);
  ip->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    log::level();
    if (*sim) return cmd_simulate(common, system, noise, seed, prefix, clean_test);
    if (*fit_cmd) return cmd_fit(common, fit_flags);
    if (*sel) {
      if (grid_defaults) grid = SelectionGrid{};
      return cmd_select(common, sel_flags, grid, jobs, table_path, one_step);
    }
    if (*pred) return cmd_predict(common, model_path, train_path, test_path, mode, horizon, out);
    if (*ev) return cmd_eval(model_path, truth_path, train_path, test_path, method, header, eval_out);
    if (*ip) return cmd_interp(common, model_path, data_path, mask_path, out);
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
