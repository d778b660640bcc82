#pragma once

// Dense symmetric-matrix kernel shared by every other module: Cholesky
// factorization with a relative pivot test, congruence transforms by a
// Cholesky factor, trace inner products and a PSD test.

#include <Eigen/Core>
#include <Eigen/Dense>
#include <cmath>

#include "ddsdp/errors.hpp"

namespace ddsdp {

template <typename Scalar>
using SymMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Mat = SymMatrix<double>;
using Vec = Vector<double>;

enum class Direction { kForward, kInverse };

/// Upper-triangular Cholesky factor U with X = UᵀU and a strictly positive
/// diagonal. Only `cholesky` constructs one, so the invariant always holds.
template <typename Scalar>
class CholFactor {
 public:
  Eigen::Index order() const { return upper_.rows(); }
  const SymMatrix<Scalar>& upper() const { return upper_; }
  auto upper_view() const { return upper_.template triangularView<Eigen::Upper>(); }
  SymMatrix<Scalar> reconstruct() const {
    return upper_.transpose().template triangularView<Eigen::Lower>() * upper_;
  }

 private:
  template <typename Derived>
  friend CholFactor<typename Derived::Scalar> cholesky(const Eigen::MatrixBase<Derived>&,
                                                       typename Derived::Scalar);
  explicit CholFactor(SymMatrix<Scalar> upper) : upper_(std::move(upper)) {}

  SymMatrix<Scalar> upper_;
};

/// Factors X = UᵀU. Throws NotPositiveDefinite(k) at the first pivot k
/// (zero-based) that does not exceed pivot_tol times the largest diagonal.
template <typename Derived>
CholFactor<typename Derived::Scalar> cholesky(const Eigen::MatrixBase<Derived>& x,
                                              typename Derived::Scalar pivot_tol = 1e-10) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.rows();
  if (x.cols() != n) throw DimensionMismatch("cholesky: matrix is not square");
  if (!x.allFinite()) throw NotPositiveDefinite(0);
  const Scalar max_diag = n > 0 ? x.diagonal().cwiseAbs().maxCoeff() : Scalar(0);
  const Scalar floor = pivot_tol * (max_diag > Scalar(0) ? max_diag : Scalar(1));

  SymMatrix<Scalar> u = SymMatrix<Scalar>::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Scalar pivot = x(k, k) - u.col(k).head(k).squaredNorm();
    if (!(pivot > floor)) throw NotPositiveDefinite(k);
    const Scalar d = std::sqrt(pivot);
    u(k, k) = d;
    if (k + 1 < n) {
      // Row k of U: (x(k, j) - U(0:k, k)ᵀ U(0:k, j)) / d for j > k.
      u.row(k).tail(n - k - 1) =
          (x.row(k).tail(n - k - 1) - u.col(k).head(k).transpose() *
                                          u.block(0, k + 1, k, n - k - 1)) /
          d;
    }
  }
  return CholFactor<Scalar>(std::move(u));
}

/// Tr(AᵀB).
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar frob_inner(const Eigen::MatrixBase<DerivedA>& a,
                                     const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionMismatch("frob_inner: operand shapes differ");
  return a.cwiseProduct(b).sum();
}

template <typename Derived>
SymMatrix<typename Derived::Scalar> symmetrized(const Eigen::MatrixBase<Derived>& a) {
  return (a + a.transpose()) / typename Derived::Scalar(2);
}

/// Forward: U A Uᵀ. Inverse: U⁻ᵀ A U⁻¹ by two triangular solves.
template <typename Derived>
SymMatrix<typename Derived::Scalar> congruence(const Eigen::MatrixBase<Derived>& a,
                                               const CholFactor<typename Derived::Scalar>& u,
                                               Direction direction) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != u.order() || a.cols() != u.order())
    throw DimensionMismatch("congruence: factor order differs from matrix order");
  if (direction == Direction::kForward) {
    const SymMatrix<Scalar> ua = u.upper_view() * a;
    const SymMatrix<Scalar> uau = u.upper_view() * ua.transpose();
    return symmetrized(uau);
  }
  const auto lower = u.upper().transpose().template triangularView<Eigen::Lower>();
  const SymMatrix<Scalar> left = lower.solve(a);                  // U⁻ᵀ A
  const SymMatrix<Scalar> both = lower.solve(left.transpose());  // U⁻ᵀ A U⁻¹ (A symmetric)
  return symmetrized(both);
}

/// Uᵀ Y U: maps a point of the transformed basis back to the original one.
template <typename Derived>
SymMatrix<typename Derived::Scalar> lift(const Eigen::MatrixBase<Derived>& y,
                                         const CholFactor<typename Derived::Scalar>& u) {
  using Scalar = typename Derived::Scalar;
  if (y.rows() != u.order() || y.cols() != u.order())
    throw DimensionMismatch("lift: factor order differs from matrix order");
  const SymMatrix<Scalar> yu = y * u.upper_view();
  const SymMatrix<Scalar> uyu = u.upper().transpose() * yu;
  return symmetrized(uyu);
}

/// X⁻¹ = U⁻¹U⁻ᵀ from the factor, by triangular solves.
template <typename Scalar>
SymMatrix<Scalar> inverse_from_factor(const CholFactor<Scalar>& u) {
  const SymMatrix<Scalar> eye = SymMatrix<Scalar>::Identity(u.order(), u.order());
  const SymMatrix<Scalar> w = u.upper().transpose().template triangularView<Eigen::Lower>().solve(eye);  // U⁻ᵀ
  return symmetrized(SymMatrix<Scalar>(w.transpose() * w));
}

template <typename Scalar>
Scalar log_det(const CholFactor<Scalar>& u) {
  return Scalar(2) * u.upper().diagonal().array().log().sum();
}

/// True iff X + tol·I admits a Cholesky factorization.
template <typename Derived>
bool is_psd(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar tol) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.rows();
  SymMatrix<Scalar> shifted = x;
  shifted.diagonal().array() += tol;
  // An absolute test: a pivot must be strictly positive, with no relative floor.
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(shifted(k, k) > Scalar(0))) return false;
    const Scalar d = std::sqrt(shifted(k, k));
    shifted.col(k).tail(n - k - 1) /= d;
    for (Eigen::Index j = k + 1; j < n; ++j)
      shifted.col(j).tail(n - j) -= shifted(j, k) * shifted.col(k).tail(n - j);
  }
  return true;
}

}  // namespace ddsdp
