#pragma once

// Generalized eigenproblem A^T A psi = rho W psi, the algebraic decay fit
// log rho_k ~ log C - alpha log k, and the seminorm ||B u||^2 = sum sqrt(rho_k) u_k^2
// with u_k = (u, psi_k)_W.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tikhreg/error.hpp"
#include "tikhreg/linalg.hpp"
#include "tikhreg/problems.hpp"
#include "tikhreg/stats.hpp"

namespace tikhreg {

struct SpectralDecomposition {
  Vector rho;  // descending; entries past m are clamped to zero
  Matrix psi;  // W-orthonormal columns
  Index m = 0;
  Index n = 0;

  auto retained_rho() const { return rho.head(m); }
  auto retained_psi() const { return psi.leftCols(m); }
};

/// Eigenpairs of A^T A psi = rho W psi. For an explicit W = L L^T the
/// symmetric matrix L^{-1} A^T A L^{-T} is decomposed and psi = L^{-T} z.
/// rho_k is kept iff rho_k > n * eps * rho_1; the rest are set to zero.
inline SpectralDecomposition decompose(const Eigen::Ref<const Matrix>& a, const WeightSpec& w) {
  const Index n = a.cols();
  w.check_dim(n);
  SpectralDecomposition d;
  d.n = n;
  if (w.is_identity()) {
    SymEig eig = sym_eig(gram(a));
    d.rho = std::move(eig.values);
    d.psi = std::move(eig.vectors);
  } else {
    const auto& llt = w.factor();
    // (A L^{-T})^T = L^{-1} A^T
    const Matrix whitened_t = llt.matrixL().solve(a.transpose());
    SymEig eig = sym_eig(gram(whitened_t.transpose()));
    d.rho = std::move(eig.values);
    d.psi = llt.matrixU().solve(eig.vectors);
  }
  const double top = d.rho.size() > 0 ? std::max(d.rho[0], 0.0) : 0.0;
  const double threshold = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * top;
  d.m = 0;
  for (Index k = 0; k < d.rho.size(); ++k) {
    if (d.rho[k] > threshold && top > 0.0) {
      d.m = k + 1;
    } else {
      d.rho[k] = 0.0;
    }
  }
  return d;
}

inline SpectralDecomposition decompose(const ProblemInstance& instance) {
  return decompose(instance.A, instance.W);
}

/// Coefficients (u, psi_k)_W for the retained modes.
inline Vector w_coefficients(const SpectralDecomposition& d, const Eigen::Ref<const Vector>& u,
                             const WeightSpec& w) {
  detail::require(u.size() == d.n, Errc::dimension_mismatch, "vector size differs from decomposition");
  return d.retained_psi().transpose() * w.apply(u);
}

/// ||B u||^2 = sum_{k<=m} sqrt(rho_k) (u, psi_k)_W^2.
inline double b_seminorm_sq(const SpectralDecomposition& d, const Eigen::Ref<const Vector>& u,
                            const WeightSpec& w) {
  const Vector c = w_coefficients(d, u, w);
  return (d.retained_rho().cwiseSqrt().array() * c.array().square()).sum();
}

struct AlphaFit {
  double alpha_hat = 0.0;
  double log_c = 0.0;
  Index k_lo = 0;  // 1-based, inclusive
  Index k_hi = 0;
  double c_upper = 0.0;
  double residual_rms = 0.0;

  /// c_upper * k^{-alpha_hat}
  double envelope(Index k) const {
    return c_upper * std::pow(static_cast<double>(k), -alpha_hat);
  }
};

inline constexpr Index kFitFirstIndex = 6;
inline constexpr Index kFitMaxIndex = 400;

/// Least-squares fit of log rho_k on log k for k = 6 .. min(400, floor(m/2)).
/// c_upper = max_{1<=k<=m} rho_k k^{alpha_hat} bounds the whole retained spectrum.
inline AlphaFit fit_alpha(std::span<const double> rho_desc, Index m) {
  const Index k_hi = std::min<Index>(kFitMaxIndex, m / 2);
  if (k_hi <= kFitFirstIndex) {
    throw Error(Errc::insufficient_spectrum, "fit range 6..min(400, m/2) is empty");
  }
  std::vector<double> ks, rs;
  for (Index k = kFitFirstIndex; k <= k_hi; ++k) {
    ks.push_back(static_cast<double>(k));
    rs.push_back(rho_desc[static_cast<std::size_t>(k - 1)]);
  }
  const LineFit line = fit_loglog(ks, rs);
  AlphaFit fit;
  fit.alpha_hat = -line.slope;
  fit.log_c = line.intercept;
  fit.k_lo = kFitFirstIndex;
  fit.k_hi = k_hi;
  fit.residual_rms = line.residual_rms;
  for (Index k = 1; k <= m; ++k) {
    fit.c_upper = std::max(fit.c_upper, rho_desc[static_cast<std::size_t>(k - 1)] *
                                            std::pow(static_cast<double>(k), fit.alpha_hat));
  }
  return fit;
}

inline AlphaFit fit_alpha(const SpectralDecomposition& d) {
  return fit_alpha(std::span<const double>(d.rho.data(), static_cast<std::size_t>(d.rho.size())),
                   d.m);
}

}  // namespace tikhreg
