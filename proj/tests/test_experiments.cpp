#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "test_helpers.hpp"

using namespace tikhreg;
using namespace tikhreg::testing;

TEST(LogGrid, EndpointsAndSpacing) {
  const std::vector<double> g = log_grid(LambdaGrid{1e-10, 1e-4, 7});
  ASSERT_EQ(g.size(), 7u);
  EXPECT_EQ(g.front(), 1e-10);
  EXPECT_EQ(g.back(), 1e-4);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], 10.0, 1e-12);
  EXPECT_ERRC(log_grid(LambdaGrid{1e-10, 1e-4, 1}), Errc::invalid_argument);
  EXPECT_ERRC(log_grid(LambdaGrid{1e-4, 1e-10, 5}), Errc::invalid_argument);
  EXPECT_ERRC(log_grid(LambdaGrid{0.0, 1e-4, 5}), Errc::invalid_argument);
}

TEST(ParallelFor, CoversEveryIndexOnceAndRethrows) {
  for (unsigned threads : {1u, 3u, 8u}) {
    std::vector<int> hits(101, 0);
    parallel_for(hits.size(), threads, [&](std::size_t i) { ++hits[i]; });
    EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
  EXPECT_ERRC(parallel_for(10, 2,
                           [](std::size_t i) {
                             if (i == 7) throw Error(Errc::domain_error, "boom");
                           }),
              Errc::domain_error);
}

TEST(Sweep, NoiseFreeErrorIncreasesWithLambda) {
  const ProblemInstance p = build_fredholm(200);
  const SweepResult s = run_sweep(p, NoiseSpec{0.0, 1}, LambdaGrid{1e-10, 1e-2, 9}, RuleSettings{});
  EXPECT_EQ(s.sigma, 0.0);
  EXPECT_EQ(s.argmin_index, 0u);
  EXPECT_EQ(s.lambda_pred, 0.0);
  for (std::size_t i = 1; i < s.output_errors.size(); ++i) {
    EXPECT_GE(s.output_errors[i], s.output_errors[i - 1]);
  }
}

TEST(Sweep, NoisyErrorHasInteriorMinimum) {
  const ProblemInstance p = build_fredholm(500);
  const SweepResult s = run_sweep(p, NoiseSpec{0.01, 11}, LambdaGrid{}, RuleSettings{});
  ASSERT_EQ(s.lambdas.size(), 10u);
  EXPECT_GT(s.argmin_index, 0u);
  EXPECT_LT(s.argmin_index, 9u);
  EXPECT_EQ(s.err_min, *std::min_element(s.output_errors.begin(), s.output_errors.end()));
  EXPECT_GT(s.lambda_pred, 0.0);
  EXPECT_GE(s.err_at_pred, 0.0);
  EXPECT_LE(s.err_at_pred, 3.0 * s.err_min);
}

TEST(MonteCarlo, DeterministicAndThreadInvariant) {
  const ProblemFactory factory = [](Index n) { return build_fredholm(n); };
  const std::vector<Index> ns = {60, 120};
  const std::vector<double> deltas = {0.1, 0.01};
  const MonteCarloSummary a = run_montecarlo(factory, ns, deltas, 4, RuleSettings{}, 99, 1);
  const MonteCarloSummary b = run_montecarlo(factory, ns, deltas, 4, RuleSettings{}, 99, 3);
  ASSERT_EQ(a.cells.size(), 4u);
  ASSERT_EQ(b.cells.size(), 4u);
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    EXPECT_EQ(a.cells[i].mean_scaled_output, b.cells[i].mean_scaled_output);
    EXPECT_EQ(a.cells[i].mean_scaled_b, b.cells[i].mean_scaled_b);
    EXPECT_GT(a.cells[i].mean_scaled_output, 0.0);
    EXPECT_GT(a.cells[i].mean_scaled_b, 0.0);
    EXPECT_GT(a.cells[i].lambda, 0.0);
  }
  EXPECT_EQ(a.slope_output, b.slope_output);
  EXPECT_EQ(a.cells[0].n, 60);
  EXPECT_EQ(a.cells[1].delta, 0.01);
  const MonteCarloSummary c = run_montecarlo(factory, ns, deltas, 4, RuleSettings{}, 100, 1);
  EXPECT_NE(a.cells[0].mean_scaled_output, c.cells[0].mean_scaled_output);
}

TEST(MonteCarlo, RejectsBadInput) {
  const ProblemFactory factory = [](Index n) { return build_fredholm(n); };
  EXPECT_ERRC(run_montecarlo(factory, {50}, {0.1}, 1, RuleSettings{}, 1), Errc::invalid_argument);
  EXPECT_ERRC(run_montecarlo(factory, {}, {0.1}, 4, RuleSettings{}, 1), Errc::invalid_argument);
  EXPECT_ERRC(run_montecarlo(factory, {50}, {0.0}, 4, RuleSettings{}, 1), Errc::invalid_argument);
}

TEST(SampleStudy, HistogramAndQuantilePairs) {
  const ProblemInstance p = build_fredholm(150);
  const SpectralDecomposition d = decompose(p);
  const SampleStudy s = run_sample_study(p, d, 0.01, 1e-7, 300, 5, 20, 2);
  ASSERT_EQ(s.samples.size(), 300u);
  ASSERT_EQ(s.bins.counts.size(), 20u);
  EXPECT_EQ(std::accumulate(s.bins.counts.begin(), s.bins.counts.end(), std::size_t{0}), 300u);
  ASSERT_EQ(s.qq_pairs.size(), 300u);
  for (std::size_t i = 1; i < s.qq_pairs.size(); ++i) {
    EXPECT_GT(s.qq_pairs[i].first, s.qq_pairs[i - 1].first);
    EXPECT_GE(s.qq_pairs[i].second, s.qq_pairs[i - 1].second);
  }
  EXPECT_GT(s.qq_correlation, 0.9);
  EXPECT_LE(s.qq_correlation, 1.0);
  const SampleStudy again = run_sample_study(p, d, 0.01, 1e-7, 300, 5, 20, 1);
  EXPECT_EQ(s.samples, again.samples);
}

TEST(SampleStudy, Preconditions) {
  const ProblemInstance p = build_fredholm(40);
  const SpectralDecomposition d = decompose(p);
  EXPECT_ERRC(run_sample_study(p, d, 0.01, 1e-6, 99, 1), Errc::invalid_argument);
  EXPECT_ERRC(run_sample_study(p, d, 0.0, 1e-6, 100, 1), Errc::degenerate_sample);
}

TEST(Table, RowOrderAndNoiseLevel) {
  const ProblemFactory factory = [](Index n) { return build_fredholm(n); };
  const std::vector<double> deltas = {0.1, 0.01};
  const std::vector<Index> ns = {200, 400};
  AdaptiveConfig cfg;
  cfg.alpha = 2.0;
  const auto rows = run_table(factory, deltas, ns, cfg, 7);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].delta, 0.1);
  EXPECT_EQ(rows[0].n, 200);
  EXPECT_EQ(rows[1].n, 400);
  EXPECT_EQ(rows[2].delta, 0.01);
  for (const auto& r : rows) {
    EXPECT_EQ(r.terminated, Termination::converged);
    EXPECT_GT(r.lambda_final, 0.0);
    EXPECT_NEAR(r.rel_res, r.delta, 0.3 * r.delta);
  }
  EXPECT_NEAR(rows[0].sigma / rows[1].sigma, 1.0, 0.01);
  EXPECT_LT(rows[2].lambda_final, rows[0].lambda_final);

  const auto direct = run_table(factory, {0.1}, {200}, cfg, 7, SolverKind::direct);
  ASSERT_EQ(direct.size(), 1u);
  EXPECT_NEAR(direct[0].lambda_final, rows[0].lambda_final, 1e-6 * rows[0].lambda_final);
  EXPECT_EQ(direct[0].iters, rows[0].iters);
}
