#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lanolem/errors.hpp"
#include "lanolem/mdl.hpp"
#include "oracles/random.hpp"

using namespace lanolem;

namespace {

/// -log2 of the Gaussian density, one point at a time.
double nll_bits(double e, double mu, double var) {
  const double density = std::exp(-(e - mu) * (e - mu) / (2 * var)) / std::sqrt(2 * std::numbers::pi * var);
  return -std::log2(density);
}

}  // namespace

TEST_CASE("model_cost hand counts") {
  ModelParams theta = ModelParams::identity(PolyBasis(3, 2));
  theta.b << 1.0, 0.0, -2.0;
  const MdlBreakdown m = model_cost(theta);
  CHECK(m.b_bits == doctest::Approx(2 * (std::log2(3.0) + 32)));
  CHECK(m.b_bits == doctest::Approx(67.17).epsilon(1e-3));
  CHECK(m.F_bits == 0.0);
  CHECK(m.A_bits == doctest::Approx(3 * (2 * std::log2(3.0) + 32)));
  CHECK(m.u_bits == doctest::Approx(3 * (std::log2(3.0) + 32)));
  CHECK(m.total_bits == doctest::Approx(m.A_bits + m.F_bits + m.b_bits + m.C_bits + m.u_bits));

  ModelParams two = ModelParams::identity(PolyBasis(2, 2));
  two.C << 1, 2, 3, 4;
  CHECK(model_cost(two).C_bits == doctest::Approx(136.0));
  two.F(0, 1) = 0.5;
  two.F(1, 2) = -0.5;
  CHECK(model_cost(two).F_bits == doctest::Approx(2 * (1 + std::log2(3.0) + 32)));

  ModelCostOptions shifted;
  shifted.count_a_minus_identity = true;
  CHECK(model_cost(two, shifted).A_bits == 0.0);
}

TEST_CASE("data_cost matches the scalar Gaussian NLL per point") {
  oracle::Rng rng(61);
  const Matrix X = rng.matrix(40, 3);
  const Matrix Xhat = X + rng.matrix(40, 3, 0.3) + Matrix::Constant(40, 3, 0.05);
  const Matrix e = X - Xhat;
  const double mu = e.mean();
  const double var = (e.array() - mu).square().mean();
  double expected = 0.0;
  for (int i = 0; i < e.size(); ++i) expected += nll_bits(e.data()[i], mu, var);
  CHECK(std::abs(data_cost(X, Xhat) - expected) < 1e-9 * e.size());
}

TEST_CASE("data_cost: unit-Gaussian entropy, scale doubling, zero residuals") {
  oracle::Rng rng(62);
  const int n = 200000;
  const Matrix E = rng.matrix(n, 1);
  const Matrix Z = Matrix::Zero(n, 1);
  CHECK(data_cost(E, Z) / n == doctest::Approx(0.5 * std::log2(2 * std::numbers::pi * std::numbers::e)).epsilon(2e-3));
  CHECK(data_cost(2.0 * E, Z) - data_cost(E, Z) == doctest::Approx(static_cast<double>(n)).epsilon(1e-9));
  const double floor_cost = data_cost(Z, Z);
  CHECK(std::isfinite(floor_cost));
  CHECK(floor_cost == doctest::Approx(0.5 * n * std::log2(2 * std::numbers::pi * kMinResidualVariance)).epsilon(1e-12));
}

TEST_CASE("data_cost skips masked cells") {
  oracle::Rng rng(63);
  const Matrix X = rng.matrix(10, 2);
  Matrix Xhat = X + rng.matrix(10, 2, 0.1);
  MissingMask mask = MissingMask::Constant(10, 2, false);
  mask(3, 1) = true;
  const double before = data_cost(X, Xhat, mask);
  Xhat(3, 1) += 1000.0;
  CHECK(data_cost(X, Xhat, mask) == before);
}

TEST_CASE("prefer_cell breaks ties toward the simpler model") {
  SelectionCell a, b;
  a.ok = b.ok = true;
  a.mdl.total_bits = b.mdl.total_bits = 100.0;
  a.d_phi = 2;
  b.d_phi = 3;
  CHECK(prefer_cell(a, b));
  b.d_phi = 2;
  a.lambda1 = 10.0;
  CHECK(prefer_cell(a, b));
  b.lambda1 = 10.0;
  b.lambda2 = 1.0;
  CHECK(prefer_cell(b, a));
  a.mdl.total_bits = 99.0;
  CHECK(prefer_cell(a, b));
  a.ok = false;
  CHECK(prefer_cell(b, a));
}

TEST_CASE("model_select bookkeeping, single cell, and jobs independence") {
  oracle::Rng rng(64);
  const ModelParams truth = oracle::random_linear_model(rng, 2, 2);
  const Matrix X = simulate(truth, Vector::Zero(2), 80, 4).observations;
  FitOptions opts;
  opts.max_outer_iters = 5;

  SelectionGrid single;
  single.d_phi = {2};
  single.lambda1 = {10.0};
  single.lambda2 = {1.0};
  const SelectionResult one = model_select(X, {}, 2, single, opts);
  REQUIRE(one.cells.size() == 1);
  CHECK(one.best == 0);
  CHECK(one.best_fit.has_value());

  SelectionGrid grid;
  grid.d_phi = {2, 3};
  grid.lambda1 = {0.0, 10.0};
  grid.lambda2 = {0.0, 50.0};
  const SelectionResult serial = model_select(X, {}, 2, grid, opts, 1);
  const SelectionResult parallel = model_select(X, {}, 2, grid, opts, 3);
  REQUIRE(serial.cells.size() == 8);
  REQUIRE(parallel.cells.size() == 8);
  CHECK(serial.best == parallel.best);
  for (std::size_t i = 0; i < serial.cells.size(); ++i) {
    CHECK(serial.cells[i].d_phi == parallel.cells[i].d_phi);
    CHECK(serial.cells[i].lambda1 == parallel.cells[i].lambda1);
    CHECK(serial.cells[i].mdl.total_bits == parallel.cells[i].mdl.total_bits);
  }
  CHECK(serial.cells[0].d_phi == 2);
  CHECK(serial.cells[1].lambda2 == 50.0);
  CHECK(serial.cells[2].lambda1 == 10.0);
  CHECK(SelectionGrid{}.size() == 108);
  CHECK_THROWS_AS(model_select(X, {}, 2, SelectionGrid{{}, {}, {}}, opts), InvalidArgument);
}

TEST_CASE("pure noise: the heavier l1 weight wins") {
  oracle::Rng rng(65);
  const Matrix X = rng.matrix(150, 2);
  FitOptions opts;
  opts.max_outer_iters = 20;
  opts.freeze_c = true;
  SelectionGrid grid;
  grid.d_phi = {2};
  grid.lambda1 = {0.0, 500.0};
  grid.lambda2 = {0.0};
  const SelectionResult sel = model_select(X, {}, 2, grid, opts);
  CHECK(sel.cells[sel.best].lambda1 == 500.0);
  CHECK(sel.cells[1].mdl.model_cost_bits() < sel.cells[0].mdl.model_cost_bits());
}

TEST_CASE("selection CSV has one field per header column") {
  SelectionCell cell;
  cell.ok = false;
  cell.error = "boom, with comma";
  const std::string header = selection_csv_header();
  const std::string row = to_csv(cell);
  auto count_fields = [](const std::string& s) {
    int fields = 1;
    bool quoted = false;
    for (char c : s) {
      if (c == '"') quoted = !quoted;
      if (c == ',' && !quoted) ++fields;
    }
    return fields;
  };
  CHECK(count_fields(header) == count_fields(row));
}
