#include "lanolem/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <random>

#include "lanolem/errors.hpp"

namespace lanolem {

// CoefficientTable lives with the generator: it is the truth format first.

std::vector<std::vector<int>> CoefficientTable::column_exponents(int dim, int degree) {
  std::vector<std::vector<int>> out;
  for (int deg = 0; deg <= degree; ++deg) {
    for (auto& e : exponents_of_degree(dim, deg)) out.push_back(std::move(e));
  }
  return out;
}

int CoefficientTable::column_count(int dim, int degree) {
  return static_cast<int>(column_exponents(dim, degree).size());
}

CoefficientTable CoefficientTable::zeros(int dim, int degree) {
  if (dim < 1 || degree < 1) throw InvalidArgument("coefficient table: dim and degree must be >= 1");
  return CoefficientTable{dim, degree, Matrix::Zero(dim, column_count(dim, degree))};
}

int CoefficientTable::column_of(const std::vector<int>& exponents) const {
  const auto cols = column_exponents(dim, degree);
  const auto it = std::find(cols.begin(), cols.end(), exponents);
  if (it == cols.end()) throw InvalidArgument("coefficient table: monomial outside the table");
  return static_cast<int>(it - cols.begin());
}

double& CoefficientTable::at(int row, const std::vector<int>& exponents) { return values(row, column_of(exponents)); }

double CoefficientTable::at(int row, const std::vector<int>& exponents) const {
  return values(row, column_of(exponents));
}

CoefficientTable CoefficientTable::padded_to(int new_degree) const {
  if (new_degree < degree) throw InvalidArgument("coefficient table: cannot pad to a lower degree");
  CoefficientTable out = zeros(dim, new_degree);
  out.values.leftCols(values.cols()) = values;  // graded order makes the old columns a prefix
  return out;
}

Vector CoefficientTable::evaluate(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dim) throw InvalidArgument("coefficient table: state has wrong dimension");
  const auto cols = column_exponents(dim, degree);
  Vector mono(cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) {
      for (int p = 0; p < cols[c][i]; ++p) v *= x[i];
    }
    mono[static_cast<Eigen::Index>(c)] = v;
  }
  return values * mono;
}

std::vector<std::string> CoefficientTable::column_labels(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& e : column_exponents(dim, degree)) out.push_back(monomial_label(e, prefix));
  return out;
}

namespace {

struct SystemSpec {
  const char* name;
  int degree;
  std::vector<double> textbook_ic;
  // (row, exponents, value)
  std::vector<std::tuple<int, std::vector<int>, double>> terms;
};

const std::vector<SystemSpec>& specs() {
  static const std::vector<SystemSpec> all = {
      {"Lorenz",
       2,
       {1.0, 1.0, 1.0},
       {{0, {1, 0, 0}, -10.0},
        {0, {0, 1, 0}, 10.0},
        {1, {1, 0, 0}, 28.0},
        {1, {0, 1, 0}, -1.0},
        {1, {1, 0, 1}, -1.0},
        {2, {1, 1, 0}, 1.0},
        {2, {0, 0, 1}, -8.0 / 3.0}}},
      {"Rossler",
       2,
       {1.0, 1.0, 1.0},
       {{0, {0, 1, 0}, -1.0},
        {0, {0, 0, 1}, -1.0},
        {1, {1, 0, 0}, 1.0},
        {1, {0, 1, 0}, 0.2},
        {2, {0, 0, 0}, 0.2},
        {2, {1, 0, 1}, 1.0},
        {2, {0, 0, 1}, -5.7}}},
      {"Halvorsen",
       2,
       {-5.0, 0.0, 0.0},
       {{0, {1, 0, 0}, -1.4},
        {0, {0, 1, 0}, -4.0},
        {0, {0, 0, 1}, -4.0},
        {0, {0, 2, 0}, -1.0},
        {1, {0, 1, 0}, -1.4},
        {1, {0, 0, 1}, -4.0},
        {1, {1, 0, 0}, -4.0},
        {1, {0, 0, 2}, -1.0},
        {2, {0, 0, 1}, -1.4},
        {2, {1, 0, 0}, -4.0},
        {2, {0, 1, 0}, -4.0},
        {2, {2, 0, 0}, -1.0}}},
      {"Arneodo",
       3,
       {0.2, 0.2, 0.2},
       {{0, {0, 1, 0}, 1.0},
        {1, {0, 0, 1}, 1.0},
        {2, {1, 0, 0}, 5.5},
        {2, {0, 1, 0}, -3.5},
        {2, {0, 0, 1}, -1.0},
        {2, {3, 0, 0}, -1.0}}},
      {"BurkeShaw",
       2,
       {0.6, 0.0, 0.0},
       {{0, {1, 0, 0}, -10.0},
        {0, {0, 1, 0}, -10.0},
        {1, {0, 1, 0}, -1.0},
        {1, {1, 0, 1}, -10.0},
        {2, {1, 1, 0}, 10.0},
        {2, {0, 0, 0}, 13.0}}},
      {"NoseHoover",
       2,
       {0.0, 5.0, 0.0},
       {{0, {0, 1, 0}, 1.0},
        {1, {1, 0, 0}, -1.0},
        {1, {0, 1, 1}, 1.0},
        {2, {0, 0, 0}, 1.5},
        {2, {0, 2, 0}, -1.0}}},
  };
  return all;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

const std::vector<std::string>& bundled_systems() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& s : specs()) out.emplace_back(s.name);
    return out;
  }();
  return names;
}

PolynomialODE make_system(std::string_view name) {
  const std::string key = lower(name);
  for (const auto& spec : specs()) {
    if (lower(spec.name) != key) continue;
    PolynomialODE sys;
    sys.name = spec.name;
    sys.field = CoefficientTable::zeros(3, spec.degree);
    for (const auto& [row, exps, value] : spec.terms) sys.field.at(row, exps) = value;
    const Vector textbook = Eigen::Map<const Vector>(spec.textbook_ic.data(), 3);
    const Matrix burn = rk4(sys, textbook, kDefaultDt, 1000);
    sys.initial_condition = burn.row(burn.rows() - 1).transpose();
    return sys;
  }
  throw InvalidArgument("unknown system '" + std::string(name) + "'");
}

Matrix rk4(const VectorField& field, const Eigen::Ref<const Vector>& x0, double dt, int n_steps) {
  if (!(dt > 0.0)) throw InvalidArgument("rk4: dt must be positive");
  if (n_steps < 0) throw InvalidArgument("rk4: n_steps must be >= 0");
  Matrix out(n_steps + 1, x0.size());
  Vector x = x0;
  out.row(0) = x.transpose();
  for (int step = 1; step <= n_steps; ++step) {
    const Vector k1 = field(x);
    const Vector k2 = field(x + 0.5 * dt * k1);
    const Vector k3 = field(x + 0.5 * dt * k2);
    const Vector k4 = field(x + dt * k3);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) throw NumericalError("rk4", step, "trajectory diverged");
    out.row(step) = x.transpose();
  }
  return out;
}

Matrix rk4(const PolynomialODE& system, const Eigen::Ref<const Vector>& x0, double dt, int n_steps) {
  return rk4([&system](const Eigen::Ref<const Vector>& x) { return system.field.evaluate(x); }, x0, dt, n_steps);
}

Matrix add_noise(const Eigen::Ref<const Matrix>& X, const NoiseSpec& spec) {
  if (!(spec.ratio_percent >= 0.0)) throw InvalidArgument("add_noise: ratio must be >= 0");
  if (!X.allFinite()) throw InvalidArgument("add_noise: data must be finite");
  if (spec.ratio_percent == 0.0) return X;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix noise(X.rows(), X.cols());
  // fill row by row so the draw order does not depend on storage order
  for (Eigen::Index t = 0; t < X.rows(); ++t)
    for (Eigen::Index i = 0; i < X.cols(); ++i) noise(t, i) = normal(rng);
  const double scale = spec.ratio_percent / 100.0 * X.norm() / noise.norm();
  return X + scale * noise;
}

Benchmark make_benchmark(const PolynomialODE& system, double noise_ratio, std::uint64_t seed, bool clean_test) {
  const int total = kTrainLength + kTestLength;
  const Matrix clean = rk4(system, system.initial_condition, kDefaultDt, total - 1);
  Benchmark out;
  out.system = system.name;
  out.noise_ratio = noise_ratio;
  out.seed = seed;
  out.dt = kDefaultDt;
  out.truth = system.field;
  out.clean_train = clean.topRows(kTrainLength);
  out.clean_test = clean.bottomRows(kTestLength);
  if (clean_test) {
    out.train = add_noise(out.clean_train, NoiseSpec{noise_ratio, seed});
    out.test = out.clean_test;
  } else {
    const Matrix noisy = add_noise(clean, NoiseSpec{noise_ratio, seed});
    out.train = noisy.topRows(kTrainLength);
    out.test = noisy.bottomRows(kTestLength);
  }
  return out;
}

MissingMask mask_intervals(int n, int d, const std::vector<MaskInterval>& intervals) {
  MissingMask mask = MissingMask::Constant(n, d, false);
  for (const auto& iv : intervals) {
    if (iv.start < 0 || iv.end > n || iv.start > iv.end) {
      throw InvalidArgument("mask_intervals: interval [" + std::to_string(iv.start) + ", " + std::to_string(iv.end) +
                            ") outside [0, " + std::to_string(n) + ")");
    }
    for (int dim : iv.dims) {
      if (dim < 0 || dim >= d) throw InvalidArgument("mask_intervals: dimension out of range");
    }
    for (int t = iv.start; t < iv.end; ++t) {
      if (iv.dims.empty()) {
        mask.row(t).setConstant(true);
      } else {
        for (int dim : iv.dims) mask(t, dim) = true;
      }
    }
  }
  return mask;
}

}  // namespace lanolem
