#pragma once

// Equality-constrained indefinite least squares:
//
//   min_x (b - Ax)^T J (b - Ax)   subject to   Bx = d,   J = diag(I_p, -I_q).
//
// Solutions come from the symmetric augmented system in (lambda, Jr, x); the
// closed form x = M^{-1}B^T N^{-1} d - P^T M^{-1} A^T J b is kept as an
// independent route and supplies the dense blocks the condition numbers use.

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <string>
#include <utility>

#include "eilscond/densela.hpp"
#include "eilscond/errors.hpp"

namespace eilscond {

/// J = diag(I_p, -I_q), stored by its block sizes.
struct SignatureMatrix {
  Index p = 0;
  Index q = 0;

  Index size() const { return p + q; }

  /// Flips the sign of the last q entries (rows, for a matrix argument).
  template <typename Derived>
  typename Derived::PlainObject apply(const Eigen::MatrixBase<Derived>& v) const {
    if (v.rows() != size()) throw ShapeMismatch("SignatureMatrix::apply: row count differs from p+q");
    typename Derived::PlainObject out = v;
    out.bottomRows(q) *= -1;
    return out;
  }

  template <typename Scalar>
  Vec<Scalar> diagonal() const {
    Vec<Scalar> dg(size());
    dg.head(p).setOnes();
    dg.tail(q).setConstant(Scalar(-1));
    return dg;
  }

  template <typename Scalar>
  Mat<Scalar> dense() const {
    return diagonal<Scalar>().asDiagonal();
  }
};

template <typename Scalar>
struct EilsProblem {
  Mat<Scalar> A;  // m x n
  Mat<Scalar> B;  // s x n
  Vec<Scalar> b;  // m
  Vec<Scalar> d;  // s
  SignatureMatrix J;

  Index m() const { return A.rows(); }
  Index n() const { return A.cols(); }
  Index s() const { return B.rows(); }

  void check_shapes() const {
    if (B.cols() != n()) throw ShapeMismatch("EilsProblem: B must have as many columns as A");
    if (b.size() != m()) throw ShapeMismatch("EilsProblem: b must have as many rows as A");
    if (d.size() != s()) throw ShapeMismatch("EilsProblem: d must have as many rows as B");
    if (J.size() != m()) throw ShapeMismatch("EilsProblem: p + q must equal rows(A)");
    if (J.p < 0 || J.q < 0) throw ShapeMismatch("EilsProblem: negative signature block");
  }

  /// ||(A, B, b, d)||_F
  Scalar data_norm() const {
    return std::sqrt(A.squaredNorm() + B.squaredNorm() + b.squaredNorm() + d.squaredNorm());
  }
};

template <typename Scalar>
struct EilsSolution {
  Vec<Scalar> x;       // n
  Vec<Scalar> r;       // m, r = b - Ax
  Vec<Scalar> lambda;  // s, B^T lambda + A^T J r = 0
};

template <typename Scalar>
struct ValidationReport {
  bool passed = false;
  Index rank_B = 0;
  Scalar sigma_max_B = 0;
  Scalar sigma_min_B = 0;
  /// Smallest eigenvalue of the symmetrized Z^T (A^T J A) Z; +inf when N(B) = {0}.
  Scalar min_eig_reduced = 0;
  Scalar max_abs_eig_reduced = 0;
  std::string reason;
};

/// Checks rank(B) = s and positive definiteness of A^T J A on N(B).
/// Never throws on a well-shaped problem; the verdict is in the report.
template <typename Scalar>
ValidationReport<Scalar> validate(const EilsProblem<Scalar>& prob, Scalar tol = Scalar(1e-10)) {
  ValidationReport<Scalar> rep;
  prob.check_shapes();
  const Index m = prob.m(), n = prob.n(), s = prob.s();
  if (s == 0) {
    rep.reason = "s = 0: no equality constraints; use the ILS path";
    return rep;
  }
  if (!(m >= n && n >= s)) {
    rep.reason = "dimensions must satisfy m >= n >= s";
    return rep;
  }

  Eigen::BDCSVD<Mat<Scalar>> svd(prob.B, Eigen::ComputeFullV);
  const Vec<Scalar>& sv = svd.singularValues();
  rep.sigma_max_B = sv(0);
  rep.sigma_min_B = sv(sv.size() - 1);
  rep.rank_B = (sv.array() > tol * sv(0)).count();

  const Index nullity = n - s;
  if (nullity == 0) {
    rep.min_eig_reduced = std::numeric_limits<Scalar>::infinity();
    rep.max_abs_eig_reduced = 0;
  } else {
    const Mat<Scalar> Z = svd.matrixV().rightCols(nullity);
    const Mat<Scalar> AZ = prob.A * Z;
    Mat<Scalar> reduced = AZ.transpose() * prob.J.apply(AZ);
    reduced = symmetrized(reduced);
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(reduced, Eigen::EigenvaluesOnly);
    rep.min_eig_reduced = eig.eigenvalues()(0);
    rep.max_abs_eig_reduced = eig.eigenvalues().cwiseAbs().maxCoeff();
  }

  std::ostringstream why;
  bool ok = true;
  if (rep.rank_B != s) {
    ok = false;
    why << "rank(B) = " << rep.rank_B << " < s = " << s << "; ";
  }
  if (prob.J.p < nullity) {
    ok = false;
    why << "p = " << prob.J.p << " < n - s = " << nullity << "; ";
  }
  if (nullity > 0 && !(rep.min_eig_reduced > tol * rep.max_abs_eig_reduced && rep.min_eig_reduced > 0)) {
    ok = false;
    why << "A^T J A is not positive definite on N(B) (min eigenvalue " << rep.min_eig_reduced << "); ";
  }
  rep.passed = ok;
  rep.reason = ok ? "ok" : why.str();
  return rep;
}

namespace detail {

/// rcond estimate, capped by the pivot ratio; the estimator alone misses exact zero pivots.
template <typename Scalar>
Scalar lu_rcond(const Eigen::PartialPivLU<Mat<Scalar>>& lu) {
  if (lu.matrixLU().size() == 0) return Scalar(1);
  const auto piv = lu.matrixLU().diagonal().cwiseAbs();
  const Scalar big = piv.maxCoeff();
  if (!(big > 0)) return Scalar(0);
  return std::min(lu.rcond(), piv.minCoeff() / big);
}

/// lu_rcond of D a D with D = diag(max_j |a_ij|)^{-1/2}, so row/column scaling alone
/// does not count as near-singularity.
template <typename Scalar>
Scalar equilibrated_rcond(const Mat<Scalar>& a) {
  if (a.size() == 0) return Scalar(1);
  const Vec<Scalar> rowmax = a.cwiseAbs().rowwise().maxCoeff();
  if (!(rowmax.minCoeff() > 0)) return Scalar(0);
  const Vec<Scalar> d = rowmax.cwiseSqrt().cwiseInverse();
  const Eigen::PartialPivLU<Mat<Scalar>> lu(Mat<Scalar>(d.asDiagonal() * a * d.asDiagonal()));
  return lu_rcond(lu);
}

template <typename Scalar>
void require_nonsingular(const Mat<Scalar>& a, const char* what) {
  const Scalar rc = equilibrated_rcond(a);
  if (!(rc > Scalar(8) * std::numeric_limits<Scalar>::epsilon()))
    throw AssumptionViolated(std::string(what) + " is numerically singular");
}

}  // namespace detail

/// The (s+m+n) symmetric augmented matrix [[0,0,B],[0,J,A],[B^T,A^T,0]] and
/// its pivoted LU factorization.
template <typename Scalar>
class AugmentedSystem {
 public:
  AugmentedSystem() = default;

  explicit AugmentedSystem(const EilsProblem<Scalar>& prob) : m_(prob.m()), n_(prob.n()), s_(prob.s()) {
    prob.check_shapes();
    const Index dim = s_ + m_ + n_;
    matrix_ = Mat<Scalar>::Zero(dim, dim);
    matrix_.block(0, s_ + m_, s_, n_) = prob.B;
    matrix_.block(s_, s_, m_, m_) = prob.J.template dense<Scalar>();
    matrix_.block(s_, s_ + m_, m_, n_) = prob.A;
    matrix_.block(s_ + m_, 0, n_, s_) = prob.B.transpose();
    matrix_.block(s_ + m_, s_, n_, m_) = prob.A.transpose();
    lu_.compute(matrix_);
    rcond_ = detail::equilibrated_rcond(matrix_);
  }

  const Mat<Scalar>& matrix() const { return matrix_; }
  const Eigen::PartialPivLU<Mat<Scalar>>& lu() const { return lu_; }
  Scalar rcond() const { return rcond_; }

  /// Returns (lambda, Jr, x) stacked.
  Vec<Scalar> solve_stacked(const Vec<Scalar>& d, const Vec<Scalar>& b) const {
    Vec<Scalar> rhs = Vec<Scalar>::Zero(s_ + m_ + n_);
    rhs.head(s_) = d;
    rhs.segment(s_, m_) = b;
    return lu_.solve(rhs);
  }

 private:
  Index m_ = 0, n_ = 0, s_ = 0;
  Mat<Scalar> matrix_;
  Eigen::PartialPivLU<Mat<Scalar>> lu_;
  Scalar rcond_ = 0;
};

/// Solves the augmented system with a pivoted dense LU.
/// Throws AssumptionViolated (with the failed check) if it is singular.
template <typename Scalar>
EilsSolution<Scalar> solve_augmented(const EilsProblem<Scalar>& prob) {
  prob.check_shapes();
  if (prob.s() == 0) throw AssumptionViolated("s = 0: no equality constraints; use the ILS path");
  AugmentedSystem<Scalar> sys(prob);
  const Scalar rc = sys.rcond();
  Vec<Scalar> z;
  bool ok = rc > Scalar(8) * std::numeric_limits<Scalar>::epsilon();
  if (ok) {
    z = sys.solve_stacked(prob.d, prob.b);
    ok = z.allFinite();
  }
  if (!ok) {
    const auto rep = validate(prob);
    throw AssumptionViolated("augmented system is singular: " + (rep.passed ? std::string("rcond too small") : rep.reason));
  }
  const Index m = prob.m(), n = prob.n(), s = prob.s();
  EilsSolution<Scalar> sol;
  sol.lambda = z.head(s);
  sol.r = prob.J.apply(Vec<Scalar>(z.segment(s, m)));
  sol.x = z.tail(n);
  return sol;
}

/// Dense blocks of the solution map, materialized once per problem.
template <typename Scalar>
struct IntermediateFactors {
  Mat<Scalar> M;     // A^T J A
  Mat<Scalar> Minv;
  Mat<Scalar> N;     // B M^{-1} B^T
  Mat<Scalar> Ninv;
  Mat<Scalar> P;     // B^T N^{-1} B M^{-1} - I
  Mat<Scalar> MinvP;       // M^{-1} P (equal to P^T M^{-1})
  Mat<Scalar> MinvBtNinv;  // M^{-1} B^T N^{-1}, n x s
  Mat<Scalar> PtMinvAtJ;   // P^T M^{-1} A^T J, n x m
  Eigen::PartialPivLU<Mat<Scalar>> lu_M;
  Eigen::PartialPivLU<Mat<Scalar>> lu_N;
};

template <typename Scalar>
IntermediateFactors<Scalar> factorize(const EilsProblem<Scalar>& prob) {
  prob.check_shapes();
  if (prob.s() == 0) throw AssumptionViolated("s = 0: N = B M^{-1} B^T is undefined; use the ILS path");
  const Index n = prob.n();
  IntermediateFactors<Scalar> f;
  const Mat<Scalar> JA = prob.J.apply(prob.A);
  f.M = symmetrized(Mat<Scalar>(prob.A.transpose() * JA));
  f.lu_M.compute(f.M);
  detail::require_nonsingular(f.M, "M = A^T J A");
  f.Minv = symmetrized(Mat<Scalar>(f.lu_M.inverse()));
  const Mat<Scalar> MinvBt = f.Minv * prob.B.transpose();
  f.N = symmetrized(Mat<Scalar>(prob.B * MinvBt));
  f.lu_N.compute(f.N);
  detail::require_nonsingular(f.N, "N = B M^{-1} B^T");
  f.Ninv = symmetrized(Mat<Scalar>(f.lu_N.inverse()));
  f.MinvBtNinv = MinvBt * f.Ninv;
  f.P = prob.B.transpose() * f.Ninv * prob.B * f.Minv - Mat<Scalar>::Identity(n, n);
  f.MinvP = f.Minv * f.P;
  f.PtMinvAtJ = f.P.transpose() * f.Minv * JA.transpose();
  return f;
}

/// Closed-form solution; also returns the dense blocks it was built from.
template <typename Scalar>
std::pair<EilsSolution<Scalar>, IntermediateFactors<Scalar>> solve_closed_form(const EilsProblem<Scalar>& prob) {
  IntermediateFactors<Scalar> f = factorize(prob);
  EilsSolution<Scalar> sol;
  sol.x = f.MinvBtNinv * prob.d - f.PtMinvAtJ * prob.b;
  sol.r = prob.b - prob.A * sol.x;
  // lambda = -(B B^T)^{-1} B A^T J r
  const Mat<Scalar> BBt = prob.B * prob.B.transpose();
  sol.lambda = -BBt.ldlt().solve(prob.B * (prob.A.transpose() * prob.J.apply(sol.r)));
  return {std::move(sol), std::move(f)};
}

/// Block residuals of the augmented system.
template <typename Scalar>
struct KktResiduals {
  Scalar constraint = 0;    // |Bx - d|
  Scalar residual = 0;      // |J(Jr) + Ax - b| = |r + Ax - b|
  Scalar stationarity = 0;  // |B^T lambda + A^T J r|
  Scalar scale = 0;         // |A|_F + |B|_F + |b| + |d|

  Scalar max_relative() const {
    const Scalar sc = scale > 0 ? scale : Scalar(1);
    return std::max({constraint, residual, stationarity}) / sc;
  }
};

template <typename Scalar>
KktResiduals<Scalar> kkt_residuals(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol) {
  KktResiduals<Scalar> res;
  res.constraint = (prob.B * sol.x - prob.d).norm();
  res.residual = (sol.r + prob.A * sol.x - prob.b).norm();
  res.stationarity = (prob.B.transpose() * sol.lambda + prob.A.transpose() * prob.J.apply(sol.r)).norm();
  res.scale = prob.A.norm() + prob.B.norm() + prob.b.norm() + prob.d.norm();
  return res;
}

/// Frechet derivative of (A, B, b, d) -> x applied to one perturbation, without
/// forming any Kronecker product.
template <typename Scalar>
Vec<Scalar> frechet_apply(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                          const IntermediateFactors<Scalar>& f, const Mat<Scalar>& dA, const Mat<Scalar>& dB,
                          const Vec<Scalar>& db, const Vec<Scalar>& dd) {
  if (dA.rows() != prob.m() || dA.cols() != prob.n() || dB.rows() != prob.s() || dB.cols() != prob.n() ||
      db.size() != prob.m() || dd.size() != prob.s())
    throw ShapeMismatch("frechet_apply: perturbation shapes do not match the problem");
  const Vec<Scalar> Jr = prob.J.apply(sol.r);
  return f.MinvBtNinv * (dd - dB * sol.x) - f.PtMinvAtJ * (db - dA * sol.x) -
         f.MinvP * (dB.transpose() * sol.lambda + dA.transpose() * Jr);
}

}  // namespace eilscond
