#pragma once

// Model problems: the Green's-function Fredholm equation discretized by a
// midpoint quadrature, a synthetic zero-boundary Gaussian blur, and the
// additive Gaussian noise model b = y + sigma * xi.

#include <cmath>
#include <cstdint>
#include <string>

#include "tikhreg/error.hpp"
#include "tikhreg/linalg.hpp"
#include "tikhreg/rng.hpp"

namespace tikhreg {

struct ProblemInstance {
  Index n = 0;
  Matrix A;
  Vector x_star;
  Vector y;  // A * x_star
  WeightSpec W;
  std::string label;
};

/// Checks shape and the clean-data consistency ||y - A x*|| <= 1e-12 ||y||.
inline void validate(const ProblemInstance& p) {
  detail::require(p.n >= 2, Errc::invalid_argument, "problem size must be >= 2");
  detail::require(p.A.rows() == p.n && p.A.cols() == p.n && p.x_star.size() == p.n &&
                      p.y.size() == p.n,
                  Errc::dimension_mismatch, "problem arrays do not match n");
  detail::require(p.A.allFinite() && p.x_star.allFinite() && p.y.allFinite(), Errc::domain_error,
                  "problem arrays contain non-finite values");
  p.W.check_dim(p.n);
  const double scale = p.y.norm();
  detail::require((p.y - p.A * p.x_star).norm() <= 1e-12 * (scale > 0 ? scale : 1.0),
                  Errc::invalid_argument, "y is not A * x_star");
}

/// Green's function of -u'' on (0,1) with Dirichlet conditions.
inline double greens_kernel(double t, double s) {
  if (!(t >= 0.0 && t <= 1.0 && s >= 0.0 && s <= 1.0)) {
    throw Error(Errc::domain_error, "greens_kernel: argument outside [0,1]^2");
  }
  return s <= t ? s * (1.0 - t) : t * (1.0 - s);
}

/// x(t) = -6 t^2 (1 - t)(2 - 8t + 7t^2).
inline double fredholm_solution(double t) {
  return -6.0 * t * t * (1.0 - t) * (2.0 - 8.0 * t + 7.0 * t * t);
}

/// A(j,i) = kappa((j-1)/n, (2i-1)/(2n)) / n and x*_j = x((2j-1)/(2n)), 1-based.
/// Output nodes sit on the left grid points while the quadrature and the
/// solution samples use midpoints; the staggering is intentional.
inline ProblemInstance build_fredholm(Index n) {
  detail::require(n >= 2, Errc::invalid_argument, "build_fredholm: n must be >= 2");
  const double h = 1.0 / static_cast<double>(n);
  ProblemInstance p;
  p.n = n;
  p.A.resize(n, n);
  p.x_star.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double s = (static_cast<double>(i) + 0.5) * h;
    for (Index j = 0; j < n; ++j) {
      const double t = static_cast<double>(j) * h;
      p.A(j, i) = h * greens_kernel(t, s);
    }
    p.x_star[i] = fredholm_solution(s);
  }
  p.y = p.A * p.x_star;
  p.W = WeightSpec::identity();
  p.label = "fredholm-n" + std::to_string(n);
  return p;
}

inline constexpr Index kBlurMaxPixels = 40000;

/// Normalized 1D Gaussian blur on `side` pixels with zero boundary: weights
/// exp(-d^2 / (2 w^2)) for |d| <= ceil(4w), scaled to sum to one over the full
/// stencil. Rows near the edge lose the mass that falls outside the image.
inline Matrix gaussian_blur_1d(Index side, double psf_width) {
  detail::require(psf_width > 0.0 && std::isfinite(psf_width), Errc::invalid_argument,
                  "psf width must be positive");
  const Index half = std::max<Index>(1, static_cast<Index>(std::ceil(4.0 * psf_width)));
  Vector stencil(2 * half + 1);
  for (Index d = -half; d <= half; ++d) {
    const double dd = static_cast<double>(d);
    stencil[d + half] = std::exp(-dd * dd / (2.0 * psf_width * psf_width));
  }
  stencil /= stencil.sum();
  Matrix k = Matrix::Zero(side, side);
  for (Index i = 0; i < side; ++i) {
    for (Index j = std::max<Index>(0, i - half); j <= std::min<Index>(side - 1, i + half); ++j) {
      k(i, j) = stencil[j - i + half];
    }
  }
  return k;
}

/// Test image on [0,1]^2 sampled at pixel centres (u = column, v = row):
/// 1.0 on [0.2,0.6] x [0.15,0.45], 0.6 on [0.55,0.8] x [0.55,0.85], plus a
/// bump 0.8 exp(-|(u,v) - (0.3,0.7)|^2 / (2 * 0.08^2)).
inline double blur_image_value(double u, double v) {
  double val = 0.0;
  if (u >= 0.2 && u <= 0.6 && v >= 0.15 && v <= 0.45) val += 1.0;
  if (u >= 0.55 && u <= 0.8 && v >= 0.55 && v <= 0.85) val += 0.6;
  const double du = u - 0.3, dv = v - 0.7;
  val += 0.8 * std::exp(-(du * du + dv * dv) / (2.0 * 0.08 * 0.08));
  return val;
}

/// Separable 2D Gaussian blur of a side x side image flattened row-major,
/// A = K (x) K with K from gaussian_blur_1d.
inline ProblemInstance build_blur(Index side, double psf_width) {
  detail::require(side >= 4, Errc::invalid_argument, "build_blur: side must be >= 4");
  if (side * side > kBlurMaxPixels) {
    throw Error(Errc::size_cap, "build_blur: side^2 exceeds 40000 pixels");
  }
  const Matrix k = gaussian_blur_1d(side, psf_width);
  const Index n = side * side;
  ProblemInstance p;
  p.n = n;
  p.A = Matrix::Zero(n, n);
  for (Index r = 0; r < side; ++r) {
    for (Index rr = 0; rr < side; ++rr) {
      const double kr = k(r, rr);
      if (kr == 0.0) continue;
      p.A.block(r * side, rr * side, side, side) = kr * k;
    }
  }
  p.x_star.resize(n);
  const double px = 1.0 / static_cast<double>(side);
  for (Index r = 0; r < side; ++r) {
    for (Index c = 0; c < side; ++c) {
      p.x_star[r * side + c] =
          blur_image_value((static_cast<double>(c) + 0.5) * px, (static_cast<double>(r) + 0.5) * px);
    }
  }
  p.y = p.A * p.x_star;
  p.W = WeightSpec::identity();
  p.label = "blur-side" + std::to_string(side);
  return p;
}

struct NoiseSpec {
  double delta = 0.0;  // relative noise level
  std::uint64_t seed = 0;
};

struct NoisyData {
  Vector b;
  double sigma = 0.0;
  double delta = 0.0;
  std::uint64_t seed = 0;
};

/// sigma = delta * ||y|| / sqrt(n).
inline double noise_strength(const Eigen::Ref<const Vector>& y, double delta) {
  return delta * y.norm() / std::sqrt(static_cast<double>(y.size()));
}

/// b = y + sigma * xi, xi iid standard normal drawn from NormalStream(seed).
inline NoisyData add_noise(const Eigen::Ref<const Vector>& y, const NoiseSpec& spec) {
  detail::require(std::isfinite(spec.delta) && spec.delta >= 0.0, Errc::invalid_argument,
                  "noise level must be finite and nonnegative");
  NoisyData out;
  out.delta = spec.delta;
  out.seed = spec.seed;
  out.sigma = noise_strength(y, spec.delta);
  out.b = y;
  if (out.sigma == 0.0) return out;
  NormalStream xi(spec.seed);
  for (Index i = 0; i < out.b.size(); ++i) out.b[i] += out.sigma * xi();
  return out;
}

inline NoisyData add_noise(const ProblemInstance& instance, const NoiseSpec& spec) {
  return add_noise(instance.y, spec);
}

}  // namespace tikhreg
