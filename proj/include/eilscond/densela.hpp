#pragma once

// Dense kernels and the vec / Kronecker / pseudo-reciprocal notation used by
// the condition-number formulas. All matrices are Eigen column-major, so vec()
// is the column-stacking of the underlying storage.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>

#include "eilscond/errors.hpp"

namespace eilscond {

using Index = Eigen::Index;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXd = Mat<double>;
using VectorXd = Vec<double>;

/// Vec-permutation matrix: Pi_{st} vec(A) = vec(A^T) for every s x t matrix A.
using VecPermutation = Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, Index>;

/// Kronecker product; block (i, j) of the result is a(i, j) * b.
template <typename DA, typename DB>
Mat<typename DA::Scalar> kron(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  using Scalar = typename DA::Scalar;
  const Index p = b.rows();
  const Index q = b.cols();
  Mat<Scalar> out(a.rows() * p, a.cols() * q);
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) out.block(i * p, j * q, p, q) = a(i, j) * b;
  return out;
}

/// Stacks the columns of a.
template <typename Derived>
Vec<typename Derived::Scalar> vec(const Eigen::MatrixBase<Derived>& a) {
  Vec<typename Derived::Scalar> out(a.size());
  Index k = 0;
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i) out(k++) = a(i, j);
  return out;
}

/// Inverse of vec for a rows x cols target.
template <typename Derived>
Mat<typename Derived::Scalar> unvec(const Eigen::MatrixBase<Derived>& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw ShapeMismatch("unvec: length does not match rows*cols");
  Mat<typename Derived::Scalar> out(rows, cols);
  for (Index k = 0; k < v.size(); ++k) out(k % rows, k / rows) = v(k);
  return out;
}

inline VecPermutation vec_perm(Index s, Index t) {
  if (s < 1 || t < 1) throw InvalidArgument("vec_perm: dimensions must be positive");
  VecPermutation perm(s * t);
  // Entry (i, j) of an s x t matrix sits at i + j*s in vec(A) and at j + i*t in vec(A^T).
  for (Index j = 0; j < t; ++j)
    for (Index i = 0; i < s; ++i) perm.indices()(i + j * s) = j + i * t;
  return perm;
}

template <typename DA, typename DB>
Mat<typename DA::Scalar> hadamard(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeMismatch("hadamard: shapes differ");
  return a.cwiseProduct(b);
}

/// Scalar pseudo-reciprocal: 1/c for c != 0 and 1 for c = 0.
template <typename Scalar>
  requires std::is_arithmetic_v<Scalar>
Scalar ddag(Scalar c) {
  return c != Scalar(0) ? Scalar(1) / c : Scalar(1);
}

template <typename Derived>
typename Derived::PlainObject ddag(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  return a.unaryExpr([](Scalar c) { return ddag(c); });
}

/// |(a^ddag)^ddag|: |a| with every zero entry replaced by one.
template <typename Derived>
typename Derived::PlainObject abs_ddag2(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  return a.unaryExpr([](Scalar c) { return c != Scalar(0) ? std::abs(c) : Scalar(1); });
}

/// a / b := diag(b^ddag) a.
template <typename DA, typename DB>
typename DA::PlainObject entrywise_div(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeMismatch("entrywise_div: shapes differ");
  return a.cwiseProduct(ddag(b));
}

// Norms. Empty operands have norm zero.

template <typename Derived>
typename Derived::RealScalar spectral(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.size() == 0) return 0;
  Mat<Scalar> dense = a;
  Eigen::BDCSVD<Mat<Scalar>> svd(dense);
  return svd.singularValues()(0);
}

/// Spectral norm of a symmetric matrix via its eigenvalues.
template <typename Derived>
typename Derived::RealScalar spectral_sym(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.size() == 0) return 0;
  Mat<Scalar> sym = (a + a.transpose()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

template <typename Derived>
typename Derived::RealScalar frobenius(const Eigen::MatrixBase<Derived>& a) {
  return a.norm();
}

/// Maximum absolute row sum.
template <typename Derived>
typename Derived::RealScalar inf_norm(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0;
  return a.cwiseAbs().rowwise().sum().maxCoeff();
}

template <typename Derived>
typename Derived::RealScalar max_norm(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0;
  return a.cwiseAbs().maxCoeff();
}

template <typename Derived>
typename Derived::RealScalar vec2(const Eigen::MatrixBase<Derived>& v) {
  return v.norm();
}

template <typename Derived>
typename Derived::RealScalar vecinf(const Eigen::MatrixBase<Derived>& v) {
  return v.size() == 0 ? 0 : v.cwiseAbs().maxCoeff();
}

template <typename Derived>
typename Derived::RealScalar vec1(const Eigen::MatrixBase<Derived>& v) {
  return v.cwiseAbs().sum();
}

/// 2-norm condition number sigma_max / sigma_min (infinite when rank deficient).
template <typename Derived>
typename Derived::RealScalar cond2(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Mat<Scalar> dense = a;
  Eigen::BDCSVD<Mat<Scalar>> svd(dense);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 1;
  const Scalar smin = sv(sv.size() - 1);
  return smin > 0 ? sv(0) / smin : std::numeric_limits<Scalar>::infinity();
}

/// Moore-Penrose pseudoinverse from an SVD; singular values below
/// tol * sigma_max are treated as zero (default tol = max(rows, cols) * eps).
template <typename Derived>
Mat<typename Derived::Scalar> pinv(const Eigen::MatrixBase<Derived>& a, typename Derived::RealScalar tol = -1) {
  using Scalar = typename Derived::Scalar;
  Mat<Scalar> dense = a;
  if (dense.size() == 0) return Mat<Scalar>::Zero(a.cols(), a.rows());
  Eigen::BDCSVD<Mat<Scalar>> svd(dense, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (tol < 0)
    tol = Scalar(std::max(a.rows(), a.cols())) * std::numeric_limits<Scalar>::epsilon();
  const Scalar cutoff = tol * sv(0);
  Vec<Scalar> inv = sv.unaryExpr([cutoff](Scalar v) { return v > cutoff ? Scalar(1) / v : Scalar(0); });
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& a) {
  return a.allFinite();
}

template <typename Scalar>
Mat<Scalar> symmetrized(const Mat<Scalar>& a) {
  return (a + a.transpose()) / Scalar(2);
}

}  // namespace eilscond
