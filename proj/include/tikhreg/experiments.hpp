#pragma once

// Experiment drivers: lambda sweeps against an a-priori rule, Monte Carlo
// estimates of the expected output / B-seminorm errors with pooled log-log
// slope fits, single-lambda sample studies (histogram + normal QQ), and the
// adaptive-rule table. Every driver is a deterministic function of its
// parameters and master seed: each realization owns its noise stream and
// results are reduced in index order, whatever the worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "tikhreg/error.hpp"
#include "tikhreg/linalg.hpp"
#include "tikhreg/param_select.hpp"
#include "tikhreg/problems.hpp"
#include "tikhreg/rng.hpp"
#include "tikhreg/spectral.hpp"
#include "tikhreg/stats.hpp"
#include "tikhreg/tikhonov.hpp"

namespace tikhreg {

using ProblemFactory = std::function<ProblemInstance(Index)>;

/// Runs body(i) for i in [0, count) on up to `threads` workers (contiguous chunks).
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        const std::size_t end = std::min(count, (w + 1) * chunk);
        for (std::size_t i = w * chunk; i < end; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct LambdaGrid {
  double lo = 1e-10;
  double hi = 1e-4;
  std::size_t count = 10;
};

/// Log-equispaced grid with exact endpoints.
inline std::vector<double> log_grid(const LambdaGrid& g) {
  detail::require(g.lo > 0.0 && g.lo < g.hi && std::isfinite(g.hi), Errc::invalid_argument,
                  "grid needs 0 < lo < hi");
  detail::require(g.count >= 2, Errc::invalid_argument, "grid needs at least two points");
  std::vector<double> out(g.count);
  const double llo = std::log(g.lo), lhi = std::log(g.hi);
  for (std::size_t i = 0; i < g.count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(g.count - 1);
    out[i] = std::exp(llo + t * (lhi - llo));
  }
  out.front() = g.lo;
  out.back() = g.hi;
  return out;
}

struct SweepResult {
  std::vector<double> lambdas;
  std::vector<double> output_errors;  // n^{-1/2} ||A x_lambda - A x*||
  double sigma = 0.0;
  double lambda_pred = 0.0;
  double err_at_pred = 0.0;
  double err_min = 0.0;
  double argmin_lambda = 0.0;
  std::size_t argmin_index = 0;
};

struct RuleSettings {
  PriorRule rule = PriorRule::rho0;
  double alpha = 4.0;
  double constant_c = 1.0;
};

/// One noise draw, output error over the grid, and the rule's prediction from
/// the true x* and sigma. With sigma = 0 the rule has no prediction and
/// lambda_pred / err_at_pred are reported as 0.
inline SweepResult run_sweep(const ProblemInstance& p, const SpectralDecomposition& d,
                             const NoiseSpec& noise, const LambdaGrid& grid, const RuleSettings& rule) {
  const std::vector<double> lambdas = log_grid(grid);
  const NoisyData data = add_noise(p, noise);
  const SpectralSolver solver(d, p, data.b);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(p.n));

  SweepResult r;
  r.sigma = data.sigma;
  r.lambdas = lambdas;
  for (double lambda : lambdas) r.output_errors.push_back(inv_sqrt_n * *solver(lambda).output_err);
  const auto it = std::min_element(r.output_errors.begin(), r.output_errors.end());
  r.argmin_index = static_cast<std::size_t>(it - r.output_errors.begin());
  r.err_min = *it;
  r.argmin_lambda = r.lambdas[r.argmin_index];
  if (data.sigma > 0.0) {
    r.lambda_pred = prior_rule(rule.rule, prior_input(p, data.sigma, rule.alpha, rule.constant_c));
    r.err_at_pred = inv_sqrt_n * *solver(r.lambda_pred).output_err;
  }
  return r;
}

inline SweepResult run_sweep(const ProblemInstance& p, const NoiseSpec& noise, const LambdaGrid& grid,
                             const RuleSettings& rule) {
  return run_sweep(p, decompose(p), noise, grid, rule);
}

struct MonteCarloCell {
  Index n = 0;
  double delta = 0.0;
  double sigma = 0.0;
  double lambda = 0.0;
  double mean_scaled_output = 0.0;
  double mean_scaled_b = 0.0;
  std::size_t reps = 0;
};

struct MonteCarloSummary {
  std::vector<MonteCarloCell> cells;
  double slope_output = 0.0;
  double intercept_output = 0.0;
  double slope_b = 0.0;
  double intercept_b = 0.0;
};

struct CellErrors {
  std::vector<double> scaled_output;
  std::vector<double> scaled_b;
};

/// Scaled output and B-seminorm errors for `reps` realizations at a fixed lambda.
/// Realization r uses the stream stream_seed(master_seed, n, delta, r).
inline CellErrors realization_errors(const ProblemInstance& p, const SpectralDecomposition& d,
                                     double delta, double lambda, std::size_t reps,
                                     std::uint64_t master_seed, unsigned threads) {
  CellErrors out{std::vector<double>(reps), std::vector<double>(reps)};
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(p.n));
  parallel_for(reps, threads, [&](std::size_t rep) {
    const NoisyData data =
        add_noise(p, NoiseSpec{delta, stream_seed(master_seed, static_cast<std::uint64_t>(p.n), delta, rep)});
    const RegularizedSolution sol = solve_spectral(d, p, data.b, lambda);
    out.scaled_output[rep] = inv_sqrt_n * *sol.output_err;
    out.scaled_b[rep] = inv_sqrt_n * std::sqrt(*sol.b_err_sq);
  });
  return out;
}

/// For every (n, delta): lambda from the prior rule with the true x*, then the
/// sample means of n^{-1/2}||A(x_lambda - x*)|| and n^{-1/2}||B(x_lambda - x*)||.
/// One pooled least-squares line of log(mean) on log(lambda) per error type.
inline MonteCarloSummary run_montecarlo(const ProblemFactory& factory, const std::vector<Index>& ns,
                                        const std::vector<double>& deltas, std::size_t reps,
                                        const RuleSettings& rule, std::uint64_t master_seed,
                                        unsigned threads = 1) {
  detail::require(reps >= 2, Errc::invalid_argument, "Monte Carlo needs reps >= 2");
  detail::require(!ns.empty() && !deltas.empty(), Errc::invalid_argument, "empty n or delta list");
  for (double delta : deltas) {
    detail::require(std::isfinite(delta) && delta > 0.0, Errc::invalid_argument, "deltas must be > 0");
  }
  MonteCarloSummary summary;
  for (Index n : ns) {
    const ProblemInstance p = factory(n);
    const SpectralDecomposition d = decompose(p);
    for (double delta : deltas) {
      MonteCarloCell cell;
      cell.n = n;
      cell.delta = delta;
      cell.reps = reps;
      cell.sigma = noise_strength(p.y, delta);
      cell.lambda = prior_rule(rule.rule, prior_input(p, cell.sigma, rule.alpha, rule.constant_c));
      const CellErrors errs = realization_errors(p, d, delta, cell.lambda, reps, master_seed, threads);
      cell.mean_scaled_output = mean(errs.scaled_output);
      cell.mean_scaled_b = mean(errs.scaled_b);
      summary.cells.push_back(cell);
    }
  }
  std::vector<double> lam, out, bb;
  for (const auto& c : summary.cells) {
    lam.push_back(c.lambda);
    out.push_back(c.mean_scaled_output);
    bb.push_back(c.mean_scaled_b);
  }
  if (summary.cells.size() >= 2) {
    const LineFit fo = fit_loglog(lam, out);
    const LineFit fb = fit_loglog(lam, bb);
    summary.slope_output = fo.slope;
    summary.intercept_output = fo.intercept;
    summary.slope_b = fb.slope;
    summary.intercept_b = fb.intercept;
  }
  return summary;
}

struct SampleStudy {
  std::vector<double> samples;  // scaled output error, realization order
  double sample_mean = 0.0;
  double sample_std = 0.0;
  Histogram bins;
  std::vector<std::pair<double, double>> qq_pairs;  // (normal quantile, standardized order statistic)
  double qq_correlation = 0.0;
};

inline constexpr std::size_t kDefaultHistogramBins = 50;

/// Histogram and normal QQ data of the scaled output error over `reps`
/// realizations at one lambda. QQ positions are (i - 0.5) / reps.
inline SampleStudy run_sample_study(const ProblemInstance& p, const SpectralDecomposition& d,
                                    double delta, double lambda, std::size_t reps,
                                    std::uint64_t master_seed, std::size_t bins = kDefaultHistogramBins,
                                    unsigned threads = 1) {
  detail::require(reps >= 100, Errc::invalid_argument, "sample study needs reps >= 100");
  SampleStudy s;
  s.samples = realization_errors(p, d, delta, lambda, reps, master_seed, threads).scaled_output;
  s.sample_mean = mean(s.samples);
  s.sample_std = stddev(s.samples);
  const auto [lo, hi] = std::minmax_element(s.samples.begin(), s.samples.end());
  if (*lo == *hi || !(s.sample_std > 0.0)) {
    throw Error(Errc::degenerate_sample, "constant sample: standardization undefined");
  }
  s.bins = histogram(s.samples, bins);
  std::vector<double> sorted = s.samples;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> q(reps), z(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    q[i] = inverse_normal_cdf((static_cast<double>(i) + 0.5) / static_cast<double>(reps));
    z[i] = (sorted[i] - s.sample_mean) / s.sample_std;
    s.qq_pairs.emplace_back(q[i], z[i]);
  }
  s.qq_correlation = pearson(q, z);
  return s;
}

inline SampleStudy run_sample_study(const ProblemInstance& p, double delta, double lambda,
                                    std::size_t reps, std::uint64_t master_seed,
                                    std::size_t bins = kDefaultHistogramBins, unsigned threads = 1) {
  return run_sample_study(p, decompose(p), delta, lambda, reps, master_seed, bins, threads);
}

struct TableRow {
  double delta = 0.0;
  Index n = 0;
  double sigma = 0.0;
  double lambda_final = 0.0;
  std::size_t iters = 0;
  Termination terminated = Termination::max_iters;
  double rel_x = 0.0;
  double rel_Ax = 0.0;
  double rel_res = 0.0;
};

enum class SolverKind { spectral, direct };

/// Adaptive rule for each (delta, n): one noise draw with seed
/// stream_seed(master_seed, n, delta, 0). Rows are ordered delta-major.
inline std::vector<TableRow> run_table(const ProblemFactory& factory, const std::vector<double>& deltas,
                                       const std::vector<Index>& ns, const AdaptiveConfig& cfg,
                                       std::uint64_t master_seed,
                                       SolverKind solver = SolverKind::spectral) {
  detail::require(!ns.empty() && !deltas.empty(), Errc::invalid_argument, "empty n or delta list");
  std::vector<TableRow> rows(deltas.size() * ns.size());
  for (std::size_t ni = 0; ni < ns.size(); ++ni) {
    const ProblemInstance p = factory(ns[ni]);
    std::optional<SpectralDecomposition> d;
    if (solver == SolverKind::spectral) d = decompose(p);
    for (std::size_t di = 0; di < deltas.size(); ++di) {
      const double delta = deltas[di];
      const NoisyData data = add_noise(
          p, NoiseSpec{delta, stream_seed(master_seed, static_cast<std::uint64_t>(p.n), delta, 0)});
      const AdaptiveTrace trace = d ? adaptive_select(p, *d, data.b, cfg) : adaptive_select(p, data.b, cfg);
      const ErrorReport rep = error_report(p, nullptr, trace.final, data.b);
      TableRow& row = rows[di * ns.size() + ni];
      row.delta = delta;
      row.n = p.n;
      row.sigma = data.sigma;
      row.lambda_final = trace.final.lambda;
      row.iters = trace.iterations();
      row.terminated = trace.terminated;
      row.rel_x = rep.rel_x;
      row.rel_Ax = rep.rel_Ax;
      row.rel_res = rep.rel_res;
    }
  }
  return rows;
}

}  // namespace tikhreg
