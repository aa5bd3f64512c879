#pragma once

// Regularization parameter rules. Both a-priori rules have the form
//   lambda^{1/2 + 1/(2 alpha)} = C sigma n^{-1/2} / rho,
// with rho = n^{-1/2} ||x*||_W (weighted rule) or rho = n^{-1/2} ||x*||_W + sigma n^{-1/2}.
// The adaptive rule replaces sigma by the scaled residual and ||x*||_W by
// ||x_lambda||_W and iterates to a fixed point.

#include <cmath>
#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "tikhreg/error.hpp"
#include "tikhreg/linalg.hpp"
#include "tikhreg/problems.hpp"
#include "tikhreg/spectral.hpp"
#include "tikhreg/tikhonov.hpp"

namespace tikhreg {

/// 2 alpha / (alpha + 1): the power mapping the rule's right-hand side to lambda.
inline double rule_exponent(double alpha) { return 2.0 * alpha / (alpha + 1.0); }

struct PriorRuleInput {
  double alpha = 4.0;
  Index n = 0;
  double sigma = 0.0;
  double x_norm_w_scaled = 0.0;  // n^{-1/2} ||x*||_W
  double constant_c = 1.0;
};

enum class PriorRule { weighted_norm, rho0 };

constexpr std::string_view to_string(PriorRule r) noexcept {
  return r == PriorRule::weighted_norm ? "w" : "rho0";
}

namespace detail {

inline void validate(const PriorRuleInput& in) {
  require(std::isfinite(in.alpha) && in.alpha > 1.0, Errc::invalid_argument, "alpha must be > 1");
  require(in.n >= 1, Errc::invalid_argument, "n must be >= 1");
  require(std::isfinite(in.sigma) && in.sigma >= 0.0, Errc::invalid_argument, "sigma must be >= 0");
  require(std::isfinite(in.x_norm_w_scaled) && in.x_norm_w_scaled >= 0.0, Errc::invalid_argument,
          "solution norm must be >= 0");
  require(std::isfinite(in.constant_c) && in.constant_c > 0.0, Errc::invalid_argument,
          "constant C must be > 0");
}

inline double apply_rule(const PriorRuleInput& in, double denom) {
  const double scaled_sigma = in.sigma / std::sqrt(static_cast<double>(in.n));
  return std::pow(in.constant_c * scaled_sigma / denom, rule_exponent(in.alpha));
}

}  // namespace detail

/// lambda = (C sigma n^{-1/2} / (n^{-1/2} ||x*||_W))^{2 alpha / (alpha + 1)}
inline double prior_rule_w(const PriorRuleInput& in) {
  detail::validate(in);
  if (in.x_norm_w_scaled == 0.0) {
    throw Error(Errc::zero_solution_norm, "weighted prior rule needs a nonzero solution norm");
  }
  return detail::apply_rule(in, in.x_norm_w_scaled);
}

/// Same as prior_rule_w with denominator rho_0 = n^{-1/2} ||x*||_W + sigma n^{-1/2}.
inline double prior_rule_rho0(const PriorRuleInput& in) {
  detail::validate(in);
  const double rho0 = in.x_norm_w_scaled + in.sigma / std::sqrt(static_cast<double>(in.n));
  if (rho0 == 0.0) {
    throw Error(Errc::zero_solution_norm, "rho_0 vanishes: zero solution and zero noise");
  }
  return detail::apply_rule(in, rho0);
}

inline double prior_rule(PriorRule rule, const PriorRuleInput& in) {
  return rule == PriorRule::weighted_norm ? prior_rule_w(in) : prior_rule_rho0(in);
}

/// Rule input built from the true solution of a problem and a noise strength.
inline PriorRuleInput prior_input(const ProblemInstance& p, double sigma, double alpha,
                                  double constant_c) {
  return PriorRuleInput{alpha, p.n, sigma,
                        w_norm(p.x_star, p.W) / std::sqrt(static_cast<double>(p.n)), constant_c};
}

enum class StopMode { absolute, relative };

constexpr std::string_view to_string(StopMode m) noexcept {
  return m == StopMode::absolute ? "absolute" : "relative";
}

struct AdaptiveConfig {
  double alpha = 4.0;
  double constant_c = 1.0;
  double tol = 1e-10;
  StopMode stop_mode = StopMode::absolute;
  std::size_t max_iters = 100;
};

enum class Termination { converged, max_iters, nonfinite };

constexpr std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iters: return "max_iters";
    case Termination::nonfinite: return "nonfinite";
  }
  return "unknown";
}

struct AdaptiveTrace {
  std::vector<double> lambdas;    // lambda_0 .. lambda_K
  std::vector<double> residuals;  // n^{-1/2} ||A x_k - b||
  std::vector<double> w_norms;    // n^{-1/2} ||x_k||_W
  Termination terminated = Termination::max_iters;
  RegularizedSolution final;

  /// Number of parameter updates performed (K).
  std::size_t iterations() const { return lambdas.empty() ? 0 : lambdas.size() - 1; }
};

inline constexpr double kLambdaFloor = 1e-300;

/// lambda_0 = n^{-alpha / (alpha + 1)}, i.e. lambda_0^{1/2 + 1/(2 alpha)} = n^{-1/2}.
inline double adaptive_initial_lambda(Index n, double alpha) {
  return std::pow(1.0 / std::sqrt(static_cast<double>(n)), rule_exponent(alpha));
}

/// One fixed-point update:
/// lambda^{1/2+1/(2 alpha)} = C (n^{-1/2} ||A x - b||) n^{-1/2} (n^{-1/2} ||x||_W)^{-1}.
inline double adaptive_update(Index n, double residual, double w_norm_value, double alpha,
                              double constant_c) {
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  const double rhs = constant_c * (inv_sqrt_n * residual) * inv_sqrt_n / (inv_sqrt_n * w_norm_value);
  return std::pow(rhs, rule_exponent(alpha));
}

/// Fixed-point parameter iteration. `solve(lambda)` must return the
/// regularized solution for the observed data at that lambda.
template <class Solve>
AdaptiveTrace adaptive_select(Index n, const AdaptiveConfig& cfg, Solve&& solve) {
  detail::require(std::isfinite(cfg.alpha) && cfg.alpha > 1.0, Errc::invalid_argument, "alpha must be > 1");
  detail::require(std::isfinite(cfg.constant_c) && cfg.constant_c > 0.0, Errc::invalid_argument,
                  "constant C must be > 0");
  detail::require(std::isfinite(cfg.tol) && cfg.tol > 0.0, Errc::invalid_argument, "tol must be > 0");
  detail::require(cfg.max_iters >= 1, Errc::invalid_argument, "max_iters must be >= 1");
  detail::require(n >= 1, Errc::invalid_argument, "n must be >= 1");

  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  AdaptiveTrace trace;
  auto record = [&](RegularizedSolution sol) {
    trace.lambdas.push_back(sol.lambda);
    trace.residuals.push_back(inv_sqrt_n * sol.residual_b);
    trace.w_norms.push_back(inv_sqrt_n * sol.w_norm);
    trace.final = std::move(sol);
  };

  record(solve(adaptive_initial_lambda(n, cfg.alpha)));
  while (true) {
    if (trace.iterations() >= cfg.max_iters) {
      trace.terminated = Termination::max_iters;
      break;
    }
    const RegularizedSolution& cur = trace.final;
    if (!(cur.w_norm > 0.0)) {
      throw Error(Errc::degenerate_solution,
                  "||x_lambda||_W vanished at lambda = " + std::to_string(cur.lambda) +
                      "; the parameter is far too large");
    }
    const double next = adaptive_update(n, cur.residual_b, cur.w_norm, cfg.alpha, cfg.constant_c);
    if (!std::isfinite(next) || next < kLambdaFloor) {
      trace.terminated = Termination::nonfinite;
      break;
    }
    const double prev = cur.lambda;
    record(solve(next));
    const double change = std::abs(next - prev);
    const bool done = cfg.stop_mode == StopMode::absolute ? change <= cfg.tol : change / next <= cfg.tol;
    if (done) {
      trace.terminated = Termination::converged;
      break;
    }
  }
  return trace;
}

/// Adaptive selection on a shared spectral decomposition.
inline AdaptiveTrace adaptive_select(const ProblemInstance& p, const SpectralDecomposition& d,
                                     const Eigen::Ref<const Vector>& b, const AdaptiveConfig& cfg) {
  const SpectralSolver solver(d, p, b);
  return adaptive_select(p.n, cfg, solver);
}

/// Adaptive selection through the normal equations.
inline AdaptiveTrace adaptive_select(const ProblemInstance& p, const Eigen::Ref<const Vector>& b,
                                     const AdaptiveConfig& cfg) {
  const DirectSolver solver(p);
  const Vector data = b;
  return adaptive_select(p.n, cfg, [&](double lambda) { return solver.solve(data, lambda); });
}

}  // namespace tikhreg
