#pragma once

// Dense symmetric linear algebra shared by the solvers: SPD solves, symmetric
// eigendecomposition and W-weighted inner products. Storage is real64 throughout.

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "tikhreg/error.hpp"

namespace tikhreg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kSymmetryTol = 1e-12;

inline bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

/// Relative asymmetry max|M - M^T| / max|M| (0 for the zero matrix).
inline double relative_asymmetry(const Eigen::Ref<const Matrix>& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

/// Returns (M + M^T)/2, rejecting inputs whose asymmetry exceeds kSymmetryTol.
inline Matrix symmetrized(const Eigen::Ref<const Matrix>& m) {
  detail::require(m.rows() == m.cols(), Errc::dimension_mismatch, "matrix is not square");
  detail::require(all_finite(m), Errc::domain_error, "matrix has non-finite entries");
  if (relative_asymmetry(m) > kSymmetryTol) {
    throw Error(Errc::not_symmetric, "matrix asymmetry exceeds 1e-12 relative");
  }
  return 0.5 * (m + m.transpose());
}

inline Eigen::LLT<Matrix> cholesky(const Eigen::Ref<const Matrix>& m) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::not_spd, "Cholesky factorization hit a non-positive pivot");
  }
  return llt;
}

/// Solves M z = rhs for symmetric positive definite M.
inline Vector spd_solve(const Eigen::Ref<const Matrix>& m, const Eigen::Ref<const Vector>& rhs) {
  detail::require(m.rows() == m.cols() && m.rows() == rhs.size(), Errc::dimension_mismatch,
                  "spd_solve: dimension mismatch");
  return cholesky(symmetrized(m)).solve(rhs);
}

struct SymEig {
  Vector values;   // descending
  Matrix vectors;  // column k pairs with values[k]
};

/// Symmetric eigendecomposition with eigenvalues sorted in descending order.
/// Ties keep the solver's original ordering.
inline SymEig sym_eig(const Eigen::Ref<const Matrix>& m) {
  const Matrix sym = symmetrized(m);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw Error(Errc::convergence_failure, "symmetric eigensolver did not converge");
  }
  const Index n = sym.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  const Vector& ev = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return ev[a] > ev[b]; });

  SymEig out{Vector(n), Matrix(n, n)};
  for (Index k = 0; k < n; ++k) {
    out.values[k] = ev[order[static_cast<std::size_t>(k)]];
    out.vectors.col(k) = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

/// A^T A assembled through a symmetric rank update, so the result is exactly symmetric.
inline Matrix gram(const Eigen::Ref<const Matrix>& a) {
  Matrix g = Matrix::Zero(a.cols(), a.cols());
  g.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  return g;
}

/// The weight W of the penalty ||x||_W^2 = x^T W x: either the identity or an
/// explicit SPD matrix (validated and Cholesky-factored once on construction).
class WeightSpec {
 public:
  enum class Kind { identity, explicit_matrix };

  WeightSpec() = default;

  static WeightSpec identity() { return WeightSpec(); }

  static WeightSpec from_matrix(const Eigen::Ref<const Matrix>& w) {
    auto data = std::make_shared<Data>();
    data->matrix = symmetrized(w);
    data->llt = cholesky(data->matrix);
    WeightSpec spec;
    spec.data_ = std::move(data);
    return spec;
  }

  Kind kind() const noexcept { return data_ ? Kind::explicit_matrix : Kind::identity; }
  bool is_identity() const noexcept { return !data_; }

  /// Explicit matrix; throws for the identity kind.
  const Matrix& matrix() const {
    detail::require(!is_identity(), Errc::invalid_argument, "identity weight has no stored matrix");
    return data_->matrix;
  }

  /// Lower Cholesky factor L with W = L L^T.
  const Eigen::LLT<Matrix>& factor() const {
    detail::require(!is_identity(), Errc::invalid_argument, "identity weight has no factor");
    return data_->llt;
  }

  /// Dense W at dimension n.
  Matrix dense(Index n) const {
    if (is_identity()) return Matrix::Identity(n, n);
    check_dim(n);
    return data_->matrix;
  }

  Vector apply(const Eigen::Ref<const Vector>& v) const {
    if (is_identity()) return v;
    check_dim(v.size());
    return data_->matrix * v;
  }

  void check_dim(Index n) const {
    if (!is_identity() && data_->matrix.rows() != n) {
      throw Error(Errc::dimension_mismatch, "weight matrix dimension does not match vector");
    }
  }

 private:
  struct Data {
    Matrix matrix;
    Eigen::LLT<Matrix> llt;
  };
  std::shared_ptr<const Data> data_;
};

/// u^T W v.
inline double w_inner(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v,
                      const WeightSpec& w) {
  detail::require(u.size() == v.size(), Errc::dimension_mismatch, "w_inner: vector sizes differ");
  if (w.is_identity()) return u.dot(v);
  w.check_dim(u.size());
  return u.dot(w.matrix() * v);
}

inline double w_norm(const Eigen::Ref<const Vector>& u, const WeightSpec& w) {
  return std::sqrt(std::max(0.0, w_inner(u, u, w)));
}

}  // namespace tikhreg
