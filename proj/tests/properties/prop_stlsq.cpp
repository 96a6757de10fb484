#include <doctest.h>

#include "lanolem/datagen.hpp"
#include "lanolem/stlsq.hpp"
#include "oracles/random.hpp"

using namespace lanolem;

TEST_CASE("support never grows across sweeps") {
  oracle::Rng rng(1801);
  for (int rep = 0; rep < 30; ++rep) {
    const Benchmark b = make_benchmark(make_system(bundled_systems()[rep % 6]), 5.0 + 10.0 * (rep % 5), rep);
    const Matrix dX = finite_diff_derivatives(b.train, b.dt);
    const StlsqConfig cfg{rng.uniform(0.01, 1.0), rep % 3 ? 0.01 : 0.0, 20};
    const StlsqResult res = stlsq_fit(b.train, dX, 2 + rep % 3, cfg);
    for (std::size_t i = 1; i < res.support_history.size(); ++i) {
      CHECK(res.support_history[i] <= res.support_history[i - 1]);
    }
  }
}

TEST_CASE("threshold 0 and alpha 0 reproduce the normal equations") {
  oracle::Rng rng(1802);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 1 + rep % 3, degree = 1 + rep % 3;
    const Matrix X = rng.matrix(80, d);
    const Matrix dX = rng.matrix(80, d);
    const Matrix L = library_matrix(X, degree);
    const Matrix normal = (L.transpose() * L).ldlt().solve(L.transpose() * dX).transpose();
    const StlsqResult res = stlsq_fit(X, dX, degree, StlsqConfig{0.0, 0.0, 20});
    CHECK((res.table.values - normal).cwiseAbs().maxCoeff() < 1e-8);
  }
}
