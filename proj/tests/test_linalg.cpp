#include <cmath>

#include "test_helpers.hpp"

using namespace tikhreg;
using namespace tikhreg::testing;

TEST(SpdSolve, IdentityReturnsRhs) {
  const Vector z = spd_solve(Matrix::Identity(3, 3), Vector::LinSpaced(3, 1, 3));
  EXPECT_TRUE(z.isApprox(Vector::LinSpaced(3, 1, 3)));
}

TEST(SpdSolve, Diagonal) {
  Matrix m = Vector(Eigen::Vector2d(2, 4)).asDiagonal();
  const Vector z = spd_solve(m, Eigen::Vector2d(2, 8));
  EXPECT_NEAR(z[0], 1.0, 1e-15);
  EXPECT_NEAR(z[1], 2.0, 1e-15);
}

TEST(SpdSolve, TwoByTwoMatchesExplicitInverse) {
  Matrix m(2, 2);
  m << 4, 1, 1, 3;
  // inverse = [[3,-1],[-1,4]] / 11
  const Vector z = spd_solve(m, Eigen::Vector2d(1, 2));
  EXPECT_NEAR(z[0], 1.0 / 11.0, 1e-15);
  EXPECT_NEAR(z[1], 7.0 / 11.0, 1e-15);
  EXPECT_LE((m * z - Eigen::Vector2d(1, 2)).norm(), 1e-10 * std::sqrt(5.0));
}

TEST(SpdSolve, RejectsIndefinite) {
  Matrix m(2, 2);
  m << 1, 2, 2, 1;
  EXPECT_ERRC(spd_solve(m, Eigen::Vector2d(1, 1)), Errc::not_spd);
}

TEST(SpdSolve, RejectsAsymmetricAndMismatched) {
  Matrix m(2, 2);
  m << 2, 1, 0, 2;
  EXPECT_ERRC(spd_solve(m, Eigen::Vector2d(1, 1)), Errc::not_symmetric);
  EXPECT_ERRC(spd_solve(Matrix::Identity(3, 3), Eigen::Vector2d(1, 1)), Errc::dimension_mismatch);
}

TEST(SpdSolve, ToleratesRoundoffAsymmetry) {
  Matrix m = random_spd(6, 3);
  m(0, 1) *= 1.0 + 1e-14;
  EXPECT_NO_THROW(spd_solve(m, Vector::Ones(6)));
}

TEST(SpdSolve, PropertyRecoversRandomSolutions) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const Index n = 2 + static_cast<Index>(seed * 7 % 49);
    const Matrix m = random_spd(n, seed);
    const Vector z = random_vector(n, seed + 100);
    const Vector got = spd_solve(m, m * z);
    EXPECT_LE((got - z).norm(), 1e-9 * z.norm()) << "n=" << n;
  }
}

TEST(SymEig, DiagonalSortedDescending) {
  const SymEig e = sym_eig(Vector(Eigen::Vector3d(3, 1, 2)).asDiagonal().toDenseMatrix());
  EXPECT_DOUBLE_EQ(e.values[0], 3.0);
  EXPECT_DOUBLE_EQ(e.values[1], 2.0);
  EXPECT_DOUBLE_EQ(e.values[2], 1.0);
}

TEST(SymEig, SwapMatrix) {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  // characteristic polynomial mu^2 - 1
  const SymEig e = sym_eig(m);
  EXPECT_NEAR(e.values[0], 1.0, 1e-15);
  EXPECT_NEAR(e.values[1], -1.0, 1e-15);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(e.vectors.col(0).dot(Eigen::Vector2d(r, r))), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(e.vectors.col(1).dot(Eigen::Vector2d(r, -r))), 1.0, 1e-14);
}

TEST(SymEig, RandomSymmetricReconstructs) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix b = random_matrix(10, 10, seed);
    const Matrix m = 0.5 * (b + b.transpose());
    const SymEig e = sym_eig(m);
    const Matrix rebuilt = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
    EXPECT_LE((rebuilt - m).norm(), 1e-9 * m.norm());
    EXPECT_LE((e.vectors.transpose() * e.vectors - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(e.values.sum(), m.trace(), 1e-10 * std::max(1.0, m.cwiseAbs().sum()));
    for (Index k = 0; k < 10; ++k) {
      EXPECT_LE((m * e.vectors.col(k) - e.values[k] * e.vectors.col(k)).norm(), 1e-8 * m.norm());
      if (k > 0) EXPECT_GE(e.values[k - 1], e.values[k]);
    }
  }
}

TEST(SymEig, RejectsAsymmetric) {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  EXPECT_ERRC(sym_eig(m), Errc::not_symmetric);
}

TEST(Gram, ExactlySymmetric) {
  const Matrix a = random_matrix(30, 20, 9);
  const Matrix g = gram(a);
  EXPECT_EQ(relative_asymmetry(g), 0.0);
  EXPECT_LE((g - a.transpose() * a).norm(), 1e-12 * g.norm());
}

TEST(WInner, Examples) {
  const Eigen::Vector2d ones(1, 1), e1(1, 0), e2(0, 1), u(1, 2);
  EXPECT_DOUBLE_EQ(w_inner(ones, ones, WeightSpec::identity()), 2.0);
  EXPECT_DOUBLE_EQ(w_inner(e1, e2, WeightSpec::identity()), 0.0);
  const auto w = WeightSpec::from_matrix(Vector(Eigen::Vector2d(2, 3)).asDiagonal().toDenseMatrix());
  // 2*1*1 + 3*2*2
  EXPECT_DOUBLE_EQ(w_inner(u, u, w), 14.0);
}

TEST(WInner, SymmetricAndPositive) {
  const auto w = WeightSpec::from_matrix(random_spd(8, 4));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Vector u = random_vector(8, 10 + seed), v = random_vector(8, 50 + seed);
    EXPECT_NEAR(w_inner(u, v, w), w_inner(v, u, w), 1e-12 * (1 + std::abs(w_inner(u, v, w))));
    EXPECT_GT(w_inner(u, u, w), 0.0);
  }
}

TEST(WInner, DimensionMismatch) {
  EXPECT_ERRC(w_inner(Eigen::Vector2d(1, 1), Eigen::Vector3d(1, 1, 1), WeightSpec::identity()),
              Errc::dimension_mismatch);
  const auto w = WeightSpec::from_matrix(Matrix::Identity(3, 3));
  EXPECT_ERRC(w_inner(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1), w), Errc::dimension_mismatch);
}

TEST(WeightSpec, RejectsNonSpd) {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  EXPECT_ERRC(WeightSpec::from_matrix(m), Errc::not_spd);
  EXPECT_TRUE(WeightSpec::identity().is_identity());
  EXPECT_ERRC(WeightSpec::identity().matrix(), Errc::invalid_argument);
}
