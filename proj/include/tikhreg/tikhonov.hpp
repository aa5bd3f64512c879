#pragma once

// Weighted Tikhonov solutions x_lambda = argmin ||Ax - b||^2 + lambda ||x||_W^2,
// computed either from the normal equations (A^T A + lambda W) x = A^T b or
// from the generalized eigenbasis, x = sum_k (b, A psi_k) / (lambda + rho_k) psi_k.

#include <cmath>
#include <optional>

#include "tikhreg/error.hpp"
#include "tikhreg/linalg.hpp"
#include "tikhreg/problems.hpp"
#include "tikhreg/spectral.hpp"

namespace tikhreg {

struct RegularizedSolution {
  double lambda = 0.0;
  Vector x;
  double residual_b = 0.0;               // ||A x - b||
  std::optional<double> output_err;      // ||A x - A x*||
  double w_norm = 0.0;                   // ||x||_W
  std::optional<double> b_err_sq;        // ||B (x - x*)||^2
};

struct ErrorReport {
  double rel_x = 0.0;
  double rel_Ax = 0.0;
  double rel_res = 0.0;
  double scaled_output = 0.0;          // n^{-1/2} ||A x - A x*||
  std::optional<double> scaled_b;      // n^{-1/2} ||B (x - x*)||, needs a decomposition
};

namespace detail {

inline void check_lambda(double lambda) {
  if (!std::isfinite(lambda) || !(lambda > 0.0)) {
    throw Error(Errc::non_finite_lambda, "lambda must be finite and > 0");
  }
}

inline void check_data(const ProblemInstance& p, const Eigen::Ref<const Vector>& b) {
  require(b.size() == p.n, Errc::dimension_mismatch, "data vector size differs from problem size");
}

inline RegularizedSolution finish(const ProblemInstance& p, const Eigen::Ref<const Vector>& b,
                                  double lambda, Vector x, const SpectralDecomposition* d) {
  RegularizedSolution sol;
  sol.lambda = lambda;
  const Vector ax = p.A * x;
  sol.residual_b = (ax - b).norm();
  if (p.y.size() == p.n) sol.output_err = (ax - p.y).norm();
  sol.w_norm = w_norm(x, p.W);
  if (d != nullptr && p.x_star.size() == p.n) {
    sol.b_err_sq = b_seminorm_sq(*d, x - p.x_star, p.W);
  }
  sol.x = std::move(x);
  return sol;
}

}  // namespace detail

/// Normal-equation solver with A^T A assembled once; each solve costs one
/// Cholesky factorization of A^T A + lambda W. cond <= (rho_1 + lambda) / lambda.
class DirectSolver {
 public:
  explicit DirectSolver(const ProblemInstance& p) : p_(&p), gram_(gram(p.A)) {}

  RegularizedSolution solve(const Eigen::Ref<const Vector>& b, double lambda,
                            const SpectralDecomposition* d = nullptr) const {
    detail::check_lambda(lambda);
    detail::check_data(*p_, b);
    Matrix system = gram_;
    if (p_->W.is_identity()) {
      system.diagonal().array() += lambda;
    } else {
      system += lambda * p_->W.matrix();
    }
    Eigen::LLT<Matrix> llt(system);
    if (llt.info() != Eigen::Success) {
      throw Error(Errc::not_spd, "A^T A + lambda W lost positive definiteness");
    }
    Vector x = llt.solve(p_->A.transpose() * b);
    return detail::finish(*p_, b, lambda, std::move(x), d);
  }

 private:
  const ProblemInstance* p_;
  Matrix gram_;
};

inline RegularizedSolution solve_direct(const ProblemInstance& p, const Eigen::Ref<const Vector>& b,
                                        double lambda) {
  return DirectSolver(p).solve(b, lambda);
}

/// g_k = (b, A psi_k) for the retained modes.
inline Vector project_data(const SpectralDecomposition& d, const ProblemInstance& p,
                           const Eigen::Ref<const Vector>& b) {
  detail::check_data(p, b);
  detail::require(d.n == p.n, Errc::dimension_mismatch, "decomposition does not match problem");
  return d.retained_psi().transpose() * (p.A.transpose() * b);
}

/// Filtered expansion x = sum_k g_k / (lambda + rho_k) psi_k from precomputed g.
inline Vector spectral_coefficients(const SpectralDecomposition& d,
                                    const Eigen::Ref<const Vector>& projected, double lambda) {
  detail::check_lambda(lambda);
  detail::require(projected.size() == d.m, Errc::dimension_mismatch, "projected data size differs from m");
  return (projected.array() / (lambda + d.retained_rho().array())).matrix();
}

inline RegularizedSolution solve_spectral(const SpectralDecomposition& d, const ProblemInstance& p,
                                          const Eigen::Ref<const Vector>& b,
                                          const Eigen::Ref<const Vector>& projected, double lambda) {
  Vector x = d.retained_psi() * spectral_coefficients(d, projected, lambda);
  return detail::finish(p, b, lambda, std::move(x), &d);
}

inline RegularizedSolution solve_spectral(const SpectralDecomposition& d, const ProblemInstance& p,
                                          const Eigen::Ref<const Vector>& b, double lambda) {
  detail::check_lambda(lambda);
  return solve_spectral(d, p, b, project_data(d, p, b), lambda);
}

/// Spectral solver bound to one data vector; repeated solves cost O(n m).
class SpectralSolver {
 public:
  SpectralSolver(const SpectralDecomposition& d, const ProblemInstance& p,
                 const Eigen::Ref<const Vector>& b)
      : d_(&d), p_(&p), b_(b), projected_(project_data(d, p, b)) {}

  RegularizedSolution operator()(double lambda) const {
    return solve_spectral(*d_, *p_, b_, projected_, lambda);
  }

 private:
  const SpectralDecomposition* d_;
  const ProblemInstance* p_;
  Vector b_;
  Vector projected_;
};

/// ||A x - b||^2 + lambda ||x||_W^2
inline double tikhonov_objective(const ProblemInstance& p, const Eigen::Ref<const Vector>& b,
                                 double lambda, const Eigen::Ref<const Vector>& x) {
  return (p.A * x - b).squaredNorm() + lambda * w_inner(x, x, p.W);
}

/// |||u|||_lambda^2 = lambda ||u||_W^2 + ||A u||^2
inline double energy_norm_sq(const ProblemInstance& p, double lambda,
                             const Eigen::Ref<const Vector>& u) {
  return lambda * w_inner(u, u, p.W) + (p.A * u).squaredNorm();
}

inline ErrorReport error_report(const ProblemInstance& p, const SpectralDecomposition* d,
                                const RegularizedSolution& sol, const Eigen::Ref<const Vector>& b) {
  detail::check_data(p, b);
  detail::require(sol.x.size() == p.n, Errc::dimension_mismatch, "solution size differs from problem size");
  const auto safe_ratio = [](double num, double den) { return den > 0.0 ? num / den : num; };
  const double sqrt_n = std::sqrt(static_cast<double>(p.n));
  const Vector ax = p.A * sol.x;
  const double out_err = (ax - p.y).norm();
  ErrorReport r;
  r.rel_x = safe_ratio((sol.x - p.x_star).norm(), p.x_star.norm());
  r.rel_Ax = safe_ratio(out_err, p.y.norm());
  r.rel_res = safe_ratio((ax - b).norm(), b.norm());
  r.scaled_output = out_err / sqrt_n;
  if (d != nullptr) {
    r.scaled_b = std::sqrt(b_seminorm_sq(*d, sol.x - p.x_star, p.W)) / sqrt_n;
  }
  return r;
}

}  // namespace tikhreg
