#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lanolem/em.hpp"
#include "oracles/lds_oracle.hpp"
#include "oracles/random.hpp"

using namespace lanolem;

namespace {

int zero_count(const ModelParams& theta) {
  const int k = theta.k();
  return static_cast<int>(((theta.A - Matrix::Identity(k, k)).array() == 0.0).count() +
                          (theta.F.array() == 0.0).count());
}

}  // namespace

TEST_CASE("the returned parameters are the best tracked iterate") {
  oracle::Rng rng(1401);
  for (int rep = 0; rep < 6; ++rep) {
    ModelParams truth = oracle::random_linear_model(rng, 2, 2);
    truth.F = rng.matrix(2, truth.k_phi(), 0.02);
    const Matrix X = simulate(truth, Vector::Zero(2), 120, 700 + rep).observations;
    FitOptions opts;
    opts.max_outer_iters = 15;
    opts.tracking = rep % 2 ? Tracking::likelihood : Tracking::q_function;
    const FitReport rep_fit = fit(X, {}, Hyperparams{2, 2, 1.0, 1.0}, opts);
    const auto best = std::min_element(rep_fit.tracked_trace.begin(), rep_fit.tracked_trace.end());
    CHECK(rep_fit.best_iteration == best - rep_fit.tracked_trace.begin());
    CHECK(rep_fit.n_iters == static_cast<int>(rep_fit.objective_trace.size()));
  }
}

TEST_CASE("linear, lambda = 0, exact linear moments: objective trajectory equals textbook LDS EM") {
  oracle::Rng rng(1402);
  for (int rep = 0; rep < 10; ++rep) {
    const int k = 1 + rep % 3, d = k + rep % 2;
    const ModelParams truth = oracle::random_linear_model(rng, k, d);
    const Matrix X = simulate(truth, Vector::Zero(k), 100, 800 + rep).observations;
    ModelParams start = truth;
    start.A += rng.matrix(k, k, 0.1);
    start.C += rng.matrix(d, k, 0.1);
    FitOptions opts;
    opts.initial = start;
    opts.linear_only = true;
    opts.moment_mode = MomentMode::exact_linear_block;
    opts.solver = SparseSolver::accelerated;
    opts.max_outer_iters = 8;
    opts.outer_tol = 1e-300;
    const FitReport got = fit(X, {}, Hyperparams{k, 2, 0.0, 0.0}, opts);
    const oracle::EmTrace ref =
        oracle::em({start.A, start.C, start.Gamma, start.R, start.b, start.u}, X, Vector::Zero(k), Matrix::Identity(k, k), 8);
    REQUIRE(got.objective_trace.size() == ref.neg_q.size());
    for (std::size_t i = 0; i < ref.neg_q.size(); ++i) {
      CHECK(std::abs(got.objective_trace[i] - ref.neg_q[i]) <= 1e-6 * std::abs(ref.neg_q[i]));
    }
  }
}

TEST_CASE("raising lambda1 never lowers the number of exact zeros (10-case regression)") {
  oracle::Rng rng(1403);
  const std::vector<double> lambdas{0.0, 1.0, 10.0, 100.0, 1000.0};
  for (int rep = 0; rep < 10; ++rep) {
    const int k = 2 + rep % 2;
    ModelParams truth = oracle::random_linear_model(rng, k, k);
    truth.F = rng.matrix(k, truth.k_phi(), 0.005);
    const Matrix X = simulate(truth, Vector::Zero(k), 150, 900 + rep).observations;
    REQUIRE(X.cwiseAbs().maxCoeff() < 100.0);
    FitOptions opts;
    opts.max_outer_iters = 10;
    opts.freeze_c = true;
    opts.solver = SparseSolver::accelerated;
    int previous = -1;
    for (double l1 : lambdas) {
      const int zeros = zero_count(fit(X, {}, Hyperparams{k, 2, l1, 0.0}, opts).theta);
      CHECK(zeros >= previous);
      previous = zeros;
    }
  }
}

TEST_CASE("linear M-step at a fixed posterior raises the penalized objective by at most 1e-6 relative") {
  // holds for coordinate-wise updates: C frozen, or C regressed on x - u
  oracle::Rng rng(1404);
  for (int rep = 0; rep < 20; ++rep) {
    const int k = 2 + rep % 2, d = k + rep % 3;
    ModelParams theta = oracle::random_linear_model(rng, k, d);
    const Matrix X = simulate(theta, Vector::Zero(k), 150, 1000 + rep).observations;
    theta.A += rng.matrix(k, k, 0.05);
    theta.C += rng.matrix(d, k, 0.05);
    const ForwardPass fwd = ekf_forward(theta, X, {}, Vector::Zero(k), Matrix::Identity(k, k));
    const SmoothedTrajectory sm = rts_backward(theta, fwd);
    const MomentSet moments = compute_moments(sm, theta.basis, MomentMode::exact_linear_block);
    const SummedMoments sums = SummedMoments::from(moments, X, {});
    const double before = penalized_objective(theta, X, {}, sm, sums, 1.0, 1.0);
    for (bool freeze : {false, true}) {
      LearnOptions lo;
      lo.sparse = {1.0, 1.0, 2000, 1e-12, SparseSolver::accelerated};
      lo.linear_only = true;
      lo.freeze_c = freeze;
      lo.center_c_with_u = true;
      const ModelParams next = learn(theta, sm, moments, sums, X, {}, lo).theta;
      const double after = penalized_objective(next, X, {}, sm, sums, 1.0, 1.0);
      CHECK(after <= before + 1e-6 * std::abs(before));
    }
  }
}
