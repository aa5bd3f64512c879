#include <cmath>
#include <cstring>

#include "test_helpers.hpp"

using namespace tikhreg;
using namespace tikhreg::testing;

TEST(GreensKernel, Examples) {
  EXPECT_DOUBLE_EQ(greens_kernel(0.5, 0.25), 0.25 * 0.5);
  EXPECT_DOUBLE_EQ(greens_kernel(0.0, 0.7), 0.0);
  EXPECT_DOUBLE_EQ(greens_kernel(0.3, 0.8), greens_kernel(0.8, 0.3));
}

TEST(GreensKernel, SymmetricNonnegativeOnGrid) {
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double t = i / 20.0, s = j / 20.0;
      EXPECT_GE(greens_kernel(t, s), 0.0);
      EXPECT_DOUBLE_EQ(greens_kernel(t, s), greens_kernel(s, t));
    }
  }
}

TEST(GreensKernel, DomainError) {
  EXPECT_ERRC(greens_kernel(-0.1, 0.5), Errc::domain_error);
  EXPECT_ERRC(greens_kernel(0.5, 1.5), Errc::domain_error);
  EXPECT_ERRC(greens_kernel(std::nan(""), 0.5), Errc::domain_error);
}

TEST(Fredholm, SmallestInstance) {
  const ProblemInstance p = build_fredholm(2);
  EXPECT_DOUBLE_EQ(p.A(0, 0), 0.0);  // kappa(0, 1/4) / 2
  // x(1/4) = -6 (1/16)(3/4)(7/16)
  EXPECT_DOUBLE_EQ(p.x_star[0], -0.123046875);
  EXPECT_DOUBLE_EQ(p.A(1, 0), 0.5 * greens_kernel(0.5, 0.25));
  EXPECT_NO_THROW(validate(p));
  EXPECT_ERRC(build_fredholm(1), Errc::invalid_argument);
}

TEST(Fredholm, QuadratureEntries) {
  const Index n = 37;
  const ProblemInstance p = build_fredholm(n);
  EXPECT_GE(p.A.minCoeff(), 0.0);
  for (Index j = 0; j < n; j += 5) {
    for (Index i = 0; i < n; i += 3) {
      const double t = static_cast<double>(j) / n, s = (2.0 * i + 1) / (2.0 * n);
      EXPECT_NEAR(p.A(j, i), greens_kernel(t, s) / n, 1e-14 * std::abs(p.A(j, i)));
    }
  }
  EXPECT_LE((p.y - p.A * p.x_star).norm(), 1e-12 * p.y.norm());
  EXPECT_TRUE(p.W.is_identity());
}

TEST(Fredholm, NoiseStrengthAtReferenceSize) {
  const ProblemInstance p = build_fredholm(2000);
  const double scaled = p.y.norm() / std::sqrt(2000.0);
  EXPECT_NEAR(scaled, 4.7117e-3, 0.005 * 4.7117e-3);
  const NoisyData d = add_noise(p, NoiseSpec{0.1, 1});
  EXPECT_NEAR(d.sigma, 4.7117e-4, 0.005 * 4.7117e-4);
}

TEST(Blur, NarrowPsfIsNearIdentity) {
  const ProblemInstance p = build_blur(8, 0.2);
  for (Index i = 0; i < p.n; ++i) EXPECT_GE(p.A(i, i), 0.99);
}

TEST(Blur, RowSumsLoseMassOnlyAtBoundary) {
  const Index side = 12;
  const ProblemInstance p = build_blur(side, 1.0);
  const Vector sums = p.A.rowwise().sum();
  EXPECT_LE(sums.maxCoeff(), 1.0 + 1e-12);
  EXPECT_GE(p.A.minCoeff(), 0.0);
  // pixel (6,6) is >= 4 pixels from every edge; the corner is not
  EXPECT_NEAR(sums[6 * side + 6], 1.0, 1e-12);
  EXPECT_LT(sums[0], 0.9);
  EXPECT_LE((p.y - p.A * p.x_star).norm(), 1e-12 * p.y.norm());
}

TEST(Blur, SeparableKroneckerStructure) {
  const Index side = 6;
  const ProblemInstance p = build_blur(side, 0.9);
  const Matrix k = gaussian_blur_1d(side, 0.9);
  for (Index r = 0; r < side; ++r)
    for (Index c = 0; c < side; ++c)
      for (Index rr = 0; rr < side; ++rr)
        for (Index cc = 0; cc < side; ++cc)
          EXPECT_DOUBLE_EQ(p.A(r * side + c, rr * side + cc), k(r, rr) * k(c, cc));
}

TEST(Blur, Preconditions) {
  EXPECT_ERRC(build_blur(201, 1.0), Errc::size_cap);
  EXPECT_ERRC(build_blur(3, 1.0), Errc::invalid_argument);
  EXPECT_ERRC(build_blur(10, 0.0), Errc::invalid_argument);
}

TEST(Noise, ZeroDeltaIsExact) {
  const ProblemInstance p = build_fredholm(50);
  const NoisyData d = add_noise(p, NoiseSpec{0.0, 9});
  EXPECT_EQ(d.sigma, 0.0);
  EXPECT_EQ(std::memcmp(d.b.data(), p.y.data(), sizeof(double) * 50), 0);
}

TEST(Noise, SameSeedIsBitIdentical) {
  const ProblemInstance p = build_fredholm(300);
  const NoisyData a = add_noise(p, NoiseSpec{0.05, 1234});
  const NoisyData b = add_noise(p, NoiseSpec{0.05, 1234});
  EXPECT_EQ(std::memcmp(a.b.data(), b.b.data(), sizeof(double) * 300), 0);
  EXPECT_EQ(a.sigma, b.sigma);
}

TEST(Noise, StandardizedNoiseMoments) {
  const Vector y = Vector::Ones(10000);
  const NoisyData d = add_noise(y, NoiseSpec{0.3, 77});
  EXPECT_DOUBLE_EQ(d.sigma, 0.3 * y.norm() / 100.0);
  const Vector xi = (d.b - y) / d.sigma;
  const std::vector<double> v(xi.data(), xi.data() + xi.size());
  EXPECT_GE(mean(v), -0.05);
  EXPECT_LE(mean(v), 0.05);
  const double var = stddev(v) * stddev(v);
  EXPECT_GE(var, 0.95);
  EXPECT_LE(var, 1.05);
}

TEST(Noise, DifferentSeedsUncorrelated) {
  const Vector ones = Vector::Ones(10000);
  const NoisyData a = add_noise(ones, NoiseSpec{1.0, 1});
  const NoisyData b = add_noise(ones, NoiseSpec{1.0, 2});
  const Vector ea = a.b - ones, eb = b.b - ones;
  const double r = pearson(std::vector<double>(ea.data(), ea.data() + ea.size()),
                           std::vector<double>(eb.data(), eb.data() + eb.size()));
  EXPECT_GE(r, -0.05);
  EXPECT_LE(r, 0.05);
}

TEST(Noise, RejectsBadDelta) {
  const Vector y = Vector::Ones(4);
  EXPECT_ERRC(add_noise(y, NoiseSpec{-0.1, 1}), Errc::invalid_argument);
  EXPECT_ERRC(add_noise(y, NoiseSpec{std::nan(""), 1}), Errc::invalid_argument);
}
