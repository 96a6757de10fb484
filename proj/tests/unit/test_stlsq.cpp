#include <doctest.h>

#include <cmath>

#include "lanolem/datagen.hpp"
#include "lanolem/errors.hpp"
#include "lanolem/eval.hpp"
#include "lanolem/stlsq.hpp"
#include "oracles/fields.hpp"
#include "oracles/random.hpp"

using namespace lanolem;

namespace {

/// Forward-Euler integration on a fine grid, kept every `stride` steps.
Matrix euler_path(const oracle::Field& f, Vector x, double dt, int n, int stride) {
  Matrix out(n, x.size());
  const double h = dt / stride;
  for (int t = 0; t < n; ++t) {
    out.row(t) = x.transpose();
    for (int s = 0; s < stride; ++s) x = x + h * f(x);
  }
  return out;
}

}  // namespace

TEST_CASE("finite differences: ramp, sine, constant") {
  Matrix ramp(20, 1);
  for (int t = 0; t < 20; ++t) ramp(t, 0) = 3.0 + 0.5 * t * 0.1;
  CHECK((finite_diff_derivatives(ramp, 0.1).array() - 0.5).abs().maxCoeff() < 1e-12);

  Matrix wave(300, 1);
  for (int t = 0; t < 300; ++t) wave(t, 0) = std::sin(0.01 * t);
  const Matrix dw = finite_diff_derivatives(wave, 0.01);
  for (int t = 0; t < 300; ++t) CHECK(std::abs(dw(t, 0) - std::cos(0.01 * t)) < 1e-3);

  CHECK(finite_diff_derivatives(Matrix::Constant(10, 2, 4.0), 0.01).isZero(0.0));
  CHECK_THROWS_AS(finite_diff_derivatives(Matrix::Zero(2, 1), 0.01), InvalidArgument);
}

TEST_CASE("noiseless Euler-sampled Lorenz: 7-term support, small error") {
  const PolynomialODE lorenz = make_system("Lorenz");
  const Matrix X = euler_path(oracle::textbook_fields().at("Lorenz"), lorenz.initial_condition, 0.01, 500, 1000);
  const StlsqResult res = stlsq_fit(X, finite_diff_derivatives(X, 0.01), 2, StlsqConfig{0.1, 0.0, 20});
  CHECK((res.table.values.array() != 0.0).count() == 7);
  CHECK(((res.table.values.array() != 0.0) == (lorenz.field.values.array() != 0.0)).all());
  CHECK(coefficient_error(lorenz.field, res.table) < 0.05);
}

TEST_CASE("threshold 0 and alpha 0 equal the normal equations; huge threshold prunes everything") {
  oracle::Rng rng(91);
  const Matrix X = rng.matrix(100, 2);
  const Matrix dX = rng.matrix(100, 2);
  const Matrix L = library_matrix(X, 2);
  const Matrix normal = (L.transpose() * L).ldlt().solve(L.transpose() * dX).transpose();
  const StlsqResult plain = stlsq_fit(X, dX, 2, StlsqConfig{0.0, 0.0, 20});
  CHECK((plain.table.values - normal).cwiseAbs().maxCoeff() < 1e-8);

  const double alpha = 0.5;
  const Matrix ridge =
      (L.transpose() * L + alpha * Matrix::Identity(L.cols(), L.cols())).ldlt().solve(L.transpose() * dX).transpose();
  CHECK((stlsq_fit(X, dX, 2, StlsqConfig{0.0, alpha, 20}).table.values - ridge).cwiseAbs().maxCoeff() < 1e-8);

  const StlsqResult none = stlsq_fit(X, dX, 2, StlsqConfig{1e9, 0.0, 20});
  CHECK(none.table.values.isZero(0.0));
  CHECK(none.empty_rows == std::vector<bool>{true, true});
}

TEST_CASE("library matrix columns follow the coefficient-table order") {
  Matrix X(1, 2);
  X << 2.0, 3.0;
  const Matrix L = library_matrix(X, 2);
  Eigen::RowVectorXd expected(6);
  expected << 1, 2, 3, 4, 6, 9;
  CHECK(L.row(0) == expected);
}

TEST_CASE("stlsq_aic by hand") {
  oracle::Rng rng(92);
  const Matrix X = rng.matrix(50, 1);
  const Matrix dX = 2.0 * X + rng.matrix(50, 1, 0.1);
  CoefficientTable table = CoefficientTable::zeros(1, 2);
  table.values(0, 1) = 2.0;
  const double rss = (dX - 2.0 * X).squaredNorm();
  CHECK(stlsq_aic(X, dX, table) == doctest::Approx(50 * std::log(rss / 50) + 2.0));
}

TEST_CASE("stlsq_select returns a grid member") {
  const PolynomialODE lorenz = make_system("Lorenz");
  const Benchmark b = make_benchmark(lorenz, 5.0, 0);
  StlsqGrid grid;
  grid.degrees = {2};
  const StlsqSelection sel = stlsq_select(b.train, 0.01, grid);
  CHECK(sel.degree == 2);
  CHECK(std::find(grid.alphas.begin(), grid.alphas.end(), sel.config.alpha) != grid.alphas.end());
  CHECK(coefficient_error(lorenz.field, sel.best.table) < 1.0);
}
