#pragma once

// Specializations of the EILS machinery:
//   ILS  min (b-Ax)^T J (b-Ax)            (no constraints; P = -I, lambda = 0)
//   WLS  min (b-Ax)^T W (b-Ax), W SPD     (weighted product norm on the data)
//   ELS  min |b-Ax|_2^2 s.t. Bx = d       (J = I_m)
//
// ILS mixed/componentwise numbers reuse the EILS streaming kernels on the
// reduced blocks Gamma_J and M^{-1} A^T J.

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "eilscond/condnum.hpp"
#include "eilscond/densela.hpp"
#include "eilscond/errors.hpp"
#include "eilscond/problem.hpp"

namespace eilscond {

/// Scalar weights for the unconstrained problems.
template <typename Scalar>
struct LsParams {
  Mat<Scalar> L;
  Scalar Phi = 1;
  Scalar beta = 1;
  Scalar xi = 1;

  void check(Index n) const {
    check_projection(L, n);
    if (!(Phi > 0 && beta > 0 && xi > 0)) throw InvalidArgument("LsParams: weights must be positive");
  }
};

template <typename Scalar>
struct LsSolution {
  Vec<Scalar> x;
  Vec<Scalar> r;
};

// ---------------------------------------------------------------------------
// ILS

template <typename Scalar>
struct IlsProblem {
  Mat<Scalar> A;
  Vec<Scalar> b;
  SignatureMatrix J;

  void check_shapes() const {
    if (b.size() != A.rows()) throw ShapeMismatch("IlsProblem: b must have as many rows as A");
    if (J.size() != A.rows()) throw ShapeMismatch("IlsProblem: p + q must equal rows(A)");
  }
};

template <typename Scalar>
struct IlsFactors {
  Mat<Scalar> M;        // A^T J A
  Mat<Scalar> Minv;
  Mat<Scalar> MinvAtJ;  // M^{-1} A^T J
};

/// A^T J A must be positive definite.
template <typename Scalar>
IlsFactors<Scalar> ils_factorize(const IlsProblem<Scalar>& p) {
  p.check_shapes();
  IlsFactors<Scalar> f;
  const Mat<Scalar> JA = p.J.apply(p.A);
  f.M = symmetrized(Mat<Scalar>(p.A.transpose() * JA));
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(f.M, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  if (ev.size() == 0 || !(ev(0) > Scalar(1e-12) * ev.cwiseAbs().maxCoeff()))
    throw AssumptionViolated("ILS: A^T J A is not positive definite");
  Eigen::LLT<Mat<Scalar>> llt(f.M);
  f.Minv = symmetrized(Mat<Scalar>(llt.solve(Mat<Scalar>::Identity(f.M.rows(), f.M.cols()))));
  f.MinvAtJ = f.Minv * JA.transpose();
  return f;
}

template <typename Scalar>
LsSolution<Scalar> ils_solve(const IlsProblem<Scalar>& p, const IlsFactors<Scalar>& f) {
  LsSolution<Scalar> sol;
  sol.x = f.MinvAtJ * p.b;
  sol.r = p.b - p.A * sol.x;
  return sol;
}

template <typename Scalar>
LsSolution<Scalar> ils_solve(const IlsProblem<Scalar>& p) {
  return ils_solve(p, ils_factorize(p));
}

/// M^{-1} A^T J (db - dA x) + M^{-1} dA^T J r
template <typename Scalar>
Vec<Scalar> ils_frechet(const IlsProblem<Scalar>& p, const LsSolution<Scalar>& sol, const IlsFactors<Scalar>& f,
                        const Mat<Scalar>& dA, const Vec<Scalar>& db) {
  if (dA.rows() != p.A.rows() || dA.cols() != p.A.cols() || db.size() != p.b.size())
    throw ShapeMismatch("ils_frechet: perturbation shapes do not match");
  return f.MinvAtJ * (db - dA * sol.x) + f.Minv * (dA.transpose() * p.J.apply(sol.r));
}

/// xi L^T [Gamma_J / Phi, M^{-1} A^T J / beta], Gamma_J = M^{-1} (x) (Jr)^T - x^T (x) M^{-1} A^T J.
template <typename Scalar>
Mat<Scalar> ils_kron_matrix(const IlsProblem<Scalar>& p, const LsSolution<Scalar>& sol, const IlsFactors<Scalar>& f,
                            const LsParams<Scalar>& params, double cap = default_memory_cap()) {
  params.check(p.A.cols());
  const Index m = p.A.rows(), n = p.A.cols(), k = params.L.cols();
  detail::guard_entries(double(k) * double(n + 1) * double(m), cap, "ils_kron_matrix");
  const Mat<Scalar> U = params.L.transpose() * f.MinvAtJ;
  const Mat<Scalar> V = params.L.transpose() * f.Minv;
  const Vec<Scalar> Jr = p.J.apply(sol.r);
  Mat<Scalar> out(k, n * m + m);
  out.leftCols(n * m) = detail::kron_pair_block<Scalar>(U, V, Vec<Scalar>(-sol.x), Jr) / params.Phi;
  out.rightCols(m) = U / params.beta;
  return params.xi * out;
}

template <typename Scalar>
Scalar ils_kappa2_kron(const IlsProblem<Scalar>& p, const LsSolution<Scalar>& sol, const IlsFactors<Scalar>& f,
                       const LsParams<Scalar>& params, double cap = default_memory_cap()) {
  return spectral(ils_kron_matrix(p, sol, f, params, cap));
}

template <typename Scalar>
Scalar ils_kappa2_form1(const IlsProblem<Scalar>& p, const LsSolution<Scalar>& sol, const IlsFactors<Scalar>& f,
                        const LsParams<Scalar>& params) {
  params.check(p.A.cols());
  const Scalar Phi = params.Phi, beta = params.beta;
  const Vec<Scalar>& x = sol.x;
  const Scalar zeta2 = beta * beta * x.squaredNorm() + Phi * Phi;
  const Vec<Scalar> Atr = p.A.transpose() * sol.r;
  Mat<Scalar> S = (zeta2 / (Phi * Phi * beta * beta)) * (p.A.transpose() * p.A);
  S.diagonal().array() += sol.r.squaredNorm() / (Phi * Phi);
  S.noalias() -= (x * Atr.transpose() + Atr * x.transpose()) / (Phi * Phi);
  const Mat<Scalar> LtMinv = params.L.transpose() * f.Minv;
  const Mat<Scalar> G = params.xi * params.xi * (LtMinv * S * LtMinv.transpose());
  return std::sqrt(spectral_sym(G));
}

/// xi L^T M^{-1} [(zeta/(Phi beta)) A^T - (beta/(zeta Phi)) x r^T, (|r|/zeta) I, (beta |r||x|/(zeta Phi)) P_x],
/// shape k x (2n + m).
template <typename Scalar>
Mat<Scalar> ils_form2_matrix(const IlsProblem<Scalar>& p, const LsSolution<Scalar>& sol, const IlsFactors<Scalar>& f,
                             const LsParams<Scalar>& params) {
  params.check(p.A.cols());
  const Index m = p.A.rows(), n = p.A.cols();
  const Scalar Phi = params.Phi, beta = params.beta;
  const Vec<Scalar>& x = sol.x;
  const Scalar nx = x.norm(), nr = sol.r.norm();
  if (nx == 0) throw ZeroSolution("ILS: x = 0, the projector P_x is undefined");
  const Scalar zeta = std::sqrt(beta * beta * nx * nx + Phi * Phi);
  Mat<Scalar> Q(n, m + 2 * n);
  Q.leftCols(m) = (zeta / (Phi * beta)) * p.A.transpose() - (beta / (zeta * Phi)) * x * sol.r.transpose();
  Q.middleCols(m, n) = (nr / zeta) * Mat<Scalar>::Identity(n, n);
  Q.rightCols(n) = (beta * nr * nx / (zeta * Phi)) * (Mat<Scalar>::Identity(n, n) - x * x.transpose() / (nx * nx));
  return params.xi * (params.L.transpose() * f.Minv * Q);
}

template <typename Scalar>
Scalar ils_kappa2_form2(const IlsProblem<Scalar>& p, const LsSolution<Scalar>& sol, const IlsFactors<Scalar>& f,
                        const LsParams<Scalar>& params) {
  return spectral(ils_form2_matrix(p, sol, f, params));
}

/// Mixed and componentwise numbers with weights (A, b)^ddag.
template <typename Scalar>
MixedComp<Scalar> ils_mixed_comp_exact(const IlsProblem<Scalar>& p, const LsSolution<Scalar>& sol,
                                       const IlsFactors<Scalar>& f, const Mat<Scalar>& L) {
  check_projection(L, p.A.cols());
  const Mat<Scalar> U = L.transpose() * f.MinvAtJ;
  const Mat<Scalar> V = L.transpose() * f.Minv;
  const Vec<Scalar> Jr = p.J.apply(sol.r);
  Vec<Scalar> h = detail::kron_pair_abs_rowsum<Scalar>(U, V, Vec<Scalar>(-sol.x), Jr, abs_ddag2(p.A));
  h += U.cwiseAbs() * abs_ddag2(p.b);
  return detail::mixed_comp_from_rows<Scalar>(h, L.transpose() * sol.x);
}

template <typename Scalar>
MixedComp<Scalar> ils_upper_bounds(const IlsProblem<Scalar>& p, const LsSolution<Scalar>& sol,
                                   const IlsFactors<Scalar>& f, const Mat<Scalar>& L) {
  check_projection(L, p.A.cols());
  const Mat<Scalar> At = abs_ddag2(p.A);
  const Mat<Scalar> U = L.transpose() * f.MinvAtJ;
  const Mat<Scalar> V = L.transpose() * f.Minv;
  Vec<Scalar> u = U.cwiseAbs() * (abs_ddag2(p.b) + At * sol.x.cwiseAbs());
  u += V.cwiseAbs() * (At.transpose() * sol.r.cwiseAbs());
  return detail::mixed_comp_from_rows<Scalar>(u, L.transpose() * sol.x);
}

// ---------------------------------------------------------------------------
// WLS

template <typename Scalar>
struct WlsProblem {
  Mat<Scalar> A;
  Vec<Scalar> b;
  Mat<Scalar> W;  // m x m symmetric positive definite

  void check_shapes() const {
    if (b.size() != A.rows()) throw ShapeMismatch("WlsProblem: b must have as many rows as A");
    if (W.rows() != A.rows() || W.cols() != A.rows()) throw ShapeMismatch("WlsProblem: W must be m x m");
  }
};

template <typename Scalar>
struct WlsFactors {
  Mat<Scalar> G;           // (A^T W A)^{-1}
  Mat<Scalar> GAtW;        // (A^T W A)^{-1} A^T W
  Mat<Scalar> W_half;      // symmetric square root of W
  Mat<Scalar> W_inv_half;  // symmetric square root of W^{-1}
};

template <typename Scalar>
WlsFactors<Scalar> wls_factorize(const WlsProblem<Scalar>& p) {
  p.check_shapes();
  const Scalar asym = max_norm(Mat<Scalar>(p.W - p.W.transpose()));
  if (asym > Scalar(1e-12) * std::max(Scalar(1), max_norm(p.W))) throw AssumptionViolated("WLS: W is not symmetric");
  Eigen::LLT<Mat<Scalar>> chol(p.W);
  if (chol.info() != Eigen::Success) throw AssumptionViolated("WLS: W is not positive definite");
  WlsFactors<Scalar> f;
  Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(symmetrized(p.W));
  f.W_half = eig.operatorSqrt();
  f.W_inv_half = eig.operatorInverseSqrt();
  const Mat<Scalar> WA = p.W * p.A;
  const Mat<Scalar> AtWA = symmetrized(Mat<Scalar>(p.A.transpose() * WA));
  Eigen::LLT<Mat<Scalar>> llt(AtWA);
  if (llt.info() != Eigen::Success) throw AssumptionViolated("WLS: A^T W A is not positive definite");
  f.G = symmetrized(Mat<Scalar>(llt.solve(Mat<Scalar>::Identity(AtWA.rows(), AtWA.cols()))));
  f.GAtW = f.G * WA.transpose();
  return f;
}

template <typename Scalar>
LsSolution<Scalar> wls_solve(const WlsProblem<Scalar>& p, const WlsFactors<Scalar>& f) {
  LsSolution<Scalar> sol;
  sol.x = f.GAtW * p.b;
  sol.r = p.b - p.A * sol.x;
  return sol;
}

template <typename Scalar>
LsSolution<Scalar> wls_solve(const WlsProblem<Scalar>& p) {
  return wls_solve(p, wls_factorize(p));
}

/// (A^T W A)^{-1} A^T W (db - dA x) + (A^T W A)^{-1} dA^T W r
template <typename Scalar>
Vec<Scalar> wls_frechet(const WlsProblem<Scalar>& p, const LsSolution<Scalar>& sol, const WlsFactors<Scalar>& f,
                        const Mat<Scalar>& dA, const Vec<Scalar>& db) {
  if (dA.rows() != p.A.rows() || dA.cols() != p.A.cols() || db.size() != p.b.size())
    throw ShapeMismatch("wls_frechet: perturbation shapes do not match");
  return f.GAtW * (db - dA * sol.x) + f.G * (dA.transpose() * (p.W * sol.r));
}

/// (A^T W A)^{-1} A^T W r; vanishes at the WLS solution.
template <typename Scalar>
Vec<Scalar> wls_cross_term(const WlsProblem<Scalar>& p, const LsSolution<Scalar>& sol, const WlsFactors<Scalar>& f) {
  (void)p;
  return f.GAtW * sol.r;
}

/// |r|_W = (r^T W r)^{1/2}
template <typename Scalar>
Scalar weighted_residual_norm(const WlsProblem<Scalar>& p, const LsSolution<Scalar>& sol) {
  return std::sqrt(std::max(Scalar(0), sol.r.dot(p.W * sol.r)));
}

/// xi L^T [Gamma_W / Phi, (A^T W A)^{-1} A^T W / beta] blockdiag(I_n (x) W^{-1/2}, W^{-1/2}):
/// the derivative measured in the weighted product norm.
template <typename Scalar>
Mat<Scalar> wls_kron_matrix(const WlsProblem<Scalar>& p, const LsSolution<Scalar>& sol, const WlsFactors<Scalar>& f,
                            const LsParams<Scalar>& params, double cap = default_memory_cap()) {
  params.check(p.A.cols());
  const Index m = p.A.rows(), n = p.A.cols(), k = params.L.cols();
  detail::guard_entries(double(k) * double(n + 1) * double(m), cap, "wls_kron_matrix");
  const Mat<Scalar> U = params.L.transpose() * f.GAtW;
  const Mat<Scalar> V = params.L.transpose() * f.G;
  const Vec<Scalar> Wr = p.W * sol.r;
  Mat<Scalar> out(k, n * m + m);
  for (Index j = 0; j < n; ++j)
    out.middleCols(j * m, m) = (V.col(j) * Wr.transpose() - sol.x(j) * U) * f.W_inv_half / params.Phi;
  out.rightCols(m) = U * f.W_inv_half / params.beta;
  return params.xi * out;
}

template <typename Scalar>
Scalar wls_kappa2_kron(const WlsProblem<Scalar>& p, const LsSolution<Scalar>& sol, const WlsFactors<Scalar>& f,
                       const LsParams<Scalar>& params, double cap = default_memory_cap()) {
  return spectral(wls_kron_matrix(p, sol, f, params, cap));
}

template <typename Scalar>
Scalar wls_kappa2_form1(const WlsProblem<Scalar>& p, const LsSolution<Scalar>& sol, const WlsFactors<Scalar>& f,
                        const LsParams<Scalar>& params) {
  params.check(p.A.cols());
  const Scalar Phi = params.Phi, beta = params.beta;
  const Scalar rw2 = weighted_residual_norm(p, sol) * weighted_residual_norm(p, sol);
  const Mat<Scalar> LtG = params.L.transpose() * f.G;
  Mat<Scalar> Gm = (rw2 / (Phi * Phi)) * (LtG * LtG.transpose());
  Gm.noalias() += (sol.x.squaredNorm() / (Phi * Phi) + Scalar(1) / (beta * beta)) * (LtG * params.L);
  return params.xi * std::sqrt(spectral_sym(Gm));
}

/// xi L^T (A^T W A)^{-1} [(|r|_W / Phi) I, (zeta/(Phi beta)) A^T W^{1/2}]
template <typename Scalar>
Mat<Scalar> wls_form2_matrix(const WlsProblem<Scalar>& p, const LsSolution<Scalar>& sol, const WlsFactors<Scalar>& f,
                             const LsParams<Scalar>& params) {
  params.check(p.A.cols());
  const Index m = p.A.rows(), n = p.A.cols();
  const Scalar Phi = params.Phi, beta = params.beta;
  const Scalar zeta = std::sqrt(beta * beta * sol.x.squaredNorm() + Phi * Phi);
  Mat<Scalar> R(n, n + m);
  R.leftCols(n) = (weighted_residual_norm(p, sol) / Phi) * Mat<Scalar>::Identity(n, n);
  R.rightCols(m) = (zeta / (Phi * beta)) * (p.A.transpose() * f.W_half);
  return params.xi * (params.L.transpose() * f.G * R);
}

template <typename Scalar>
Scalar wls_kappa2_form2(const WlsProblem<Scalar>& p, const LsSolution<Scalar>& sol, const WlsFactors<Scalar>& f,
                        const LsParams<Scalar>& params) {
  return spectral(wls_form2_matrix(p, sol, f, params));
}

/// Mixed and componentwise numbers with weights (A, b)^ddag in the plain max norm.
template <typename Scalar>
MixedComp<Scalar> wls_mixed_comp_exact(const WlsProblem<Scalar>& p, const LsSolution<Scalar>& sol,
                                       const WlsFactors<Scalar>& f, const Mat<Scalar>& L) {
  check_projection(L, p.A.cols());
  const Mat<Scalar> U = L.transpose() * f.GAtW;
  const Mat<Scalar> V = L.transpose() * f.G;
  const Vec<Scalar> Wr = p.W * sol.r;
  Vec<Scalar> h = detail::kron_pair_abs_rowsum<Scalar>(U, V, Vec<Scalar>(-sol.x), Wr, abs_ddag2(p.A));
  h += U.cwiseAbs() * abs_ddag2(p.b);
  return detail::mixed_comp_from_rows<Scalar>(h, L.transpose() * sol.x);
}

/// M_Wmc^Ubd = |L^T G| |A~^T| |W r| + |L^T G A^T W| (|A~| |x| + |b~|)
template <typename Scalar>
MixedComp<Scalar> wls_upper_bounds(const WlsProblem<Scalar>& p, const LsSolution<Scalar>& sol,
                                   const WlsFactors<Scalar>& f, const Mat<Scalar>& L) {
  check_projection(L, p.A.cols());
  const Mat<Scalar> At = abs_ddag2(p.A);
  const Mat<Scalar> U = L.transpose() * f.GAtW;
  const Mat<Scalar> V = L.transpose() * f.G;
  Vec<Scalar> u = V.cwiseAbs() * (At.transpose() * (p.W * sol.r).cwiseAbs());
  u += U.cwiseAbs() * (At * sol.x.cwiseAbs() + abs_ddag2(p.b));
  return detail::mixed_comp_from_rows<Scalar>(u, L.transpose() * sol.x);
}

// ---------------------------------------------------------------------------
// ELS

template <typename Scalar>
struct ElsProblem {
  Mat<Scalar> A;
  Mat<Scalar> B;
  Vec<Scalar> b;
  Vec<Scalar> d;

  /// The same data as an EILS problem with J = I_m.
  EilsProblem<Scalar> as_eils() const {
    EilsProblem<Scalar> e{A, B, b, d, SignatureMatrix{A.rows(), 0}};
    e.check_shapes();
    return e;
  }
};

/// rank(B) = s and null(A) ∩ null(B) = {0}.
template <typename Scalar>
ValidationReport<Scalar> els_validate(const ElsProblem<Scalar>& p, Scalar tol = Scalar(1e-10)) {
  return validate(p.as_eils(), tol);
}

template <typename Scalar>
EilsSolution<Scalar> els_solve(const ElsProblem<Scalar>& p) {
  return solve_augmented(p.as_eils());
}

/// x = B_A^+ d + (A (I - B^+ B))^+ b,  B_A^+ = (I - (A (I - B^+ B))^+ A) B^+.
template <typename Scalar>
Vec<Scalar> els_pinv_solution(const ElsProblem<Scalar>& p) {
  const Index n = p.A.cols();
  const Mat<Scalar> Bp = pinv(p.B);
  const Mat<Scalar> proj = Mat<Scalar>::Identity(n, n) - Bp * p.B;
  const Mat<Scalar> AP = p.A * proj;
  // cutoff relative to |A|: A(I - B^+ B) is pure rounding noise when n = s
  const Scalar nap = spectral(AP), cut = Scalar(1e-10) * spectral(p.A);
  const Mat<Scalar> APp = nap > cut ? pinv(AP, cut / nap) : Mat<Scalar>(Mat<Scalar>::Zero(n, p.A.rows()));
  const Mat<Scalar> BA = (Mat<Scalar>::Identity(n, n) - APp * p.A) * Bp;
  return BA * p.d + APp * p.b;
}

/// Returns the pseudoinverse-form solution after checking it against the
/// closed form; throws AssumptionViolated if they disagree beyond rel_tol.
template <typename Scalar>
Vec<Scalar> els_pinv_crosscheck(const ElsProblem<Scalar>& p, Scalar rel_tol = Scalar(1e-8)) {
  const Vec<Scalar> xp = els_pinv_solution(p);
  const auto [sol, f] = solve_closed_form(p.as_eils());
  const Scalar diff = (xp - sol.x).norm();
  if (diff > rel_tol * std::max(sol.x.norm(), std::numeric_limits<Scalar>::min()))
    throw AssumptionViolated("ELS: pseudoinverse and closed-form solutions disagree");
  return xp;
}

/// The displayed block inverse of [[0,0,B],[0,I,A],[B^T,A^T,0]] in unknown order (lambda, r, x).
template <typename Scalar>
Mat<Scalar> els_augmented_inverse(const ElsProblem<Scalar>& p, const IntermediateFactors<Scalar>& f) {
  const Index m = p.A.rows(), n = p.A.cols(), s = p.B.rows();
  const Mat<Scalar> NinvBMinv = f.Ninv * p.B * f.Minv;
  Mat<Scalar> inv(s + m + n, s + m + n);
  inv.block(0, 0, s, s) = f.Ninv;
  inv.block(0, s, s, m) = -NinvBMinv * p.A.transpose();
  inv.block(0, s + m, s, n) = NinvBMinv;
  inv.block(s, 0, m, s) = -p.A * f.MinvBtNinv;
  inv.block(s, s, m, m) = Mat<Scalar>::Identity(m, m) + p.A * f.P.transpose() * f.Minv * p.A.transpose();
  inv.block(s, s + m, m, n) = -p.A * f.MinvP;
  inv.block(s + m, 0, n, s) = f.MinvBtNinv;
  inv.block(s + m, s, n, m) = -f.P.transpose() * f.Minv * p.A.transpose();
  inv.block(s + m, s + m, n, n) = f.MinvP;
  return inv;
}

/// Q for the ELS compact form: [(zeta/(Phi beta)) A^T, (|r|/Phi) I, (|lambda|/gamma) I,
/// (vartheta |lambda||x|/(gamma Psi)) P_x], shape n x (m + 3n).
template <typename Scalar>
Mat<Scalar> els_form2_Q(const ElsProblem<Scalar>& p, const EilsSolution<Scalar>& sol, Scalar Phi, Scalar Psi,
                        Scalar beta, Scalar vth) {
  const Index m = p.A.rows(), n = p.A.cols();
  const Vec<Scalar>& x = sol.x;
  const Scalar nx = x.norm(), nr = sol.r.norm(), nl = sol.lambda.norm();
  if (nx == 0) throw ZeroSolution("ELS: x = 0, the projector P_x is undefined");
  const Scalar zeta = std::sqrt(beta * beta * nx * nx + Phi * Phi);
  const Scalar gamma = std::sqrt(vth * vth * nx * nx + Psi * Psi);
  const Mat<Scalar> I = Mat<Scalar>::Identity(n, n);
  Mat<Scalar> Q(n, m + 3 * n);
  Q.leftCols(m) = (zeta / (Phi * beta)) * p.A.transpose();
  Q.middleCols(m, n) = (nr / Phi) * I;
  Q.middleCols(m + n, n) = (nl / gamma) * I;
  Q.rightCols(n) = (vth * nl * nx / (gamma * Psi)) * (I - x * x.transpose() / (nx * nx));
  return Q;
}

/// ELS Gram form with S = (|lambda|^2/Psi^2 + |r|^2/Phi^2) I + (zeta^2/(beta^2 Phi^2)) A^T A.
template <typename Scalar>
Scalar els_kappa2_form1(const ElsProblem<Scalar>& p, const EilsSolution<Scalar>& sol,
                        const IntermediateFactors<Scalar>& f, const CondParams<Scalar>& params) {
  const EilsProblem<Scalar> e = p.as_eils();
  check_params(e, params);
  detail::require_scalar_weights(params, "els_kappa2_form1");
  const Scalar Phi = params.Phi.scalar(), Psi = params.Psi.scalar(), beta = params.beta.scalar(),
               vth = params.vartheta.scalar(), xi = params.xi.scalar();
  const Vec<Scalar>& x = sol.x;
  const Scalar xx = x.squaredNorm();
  const Scalar zeta2 = beta * beta * xx + Phi * Phi;
  const Scalar gamma2 = vth * vth * xx + Psi * Psi;
  Mat<Scalar> S = (zeta2 / (beta * beta * Phi * Phi)) * (p.A.transpose() * p.A);
  S.diagonal().array() += sol.lambda.squaredNorm() / (Psi * Psi) + sol.r.squaredNorm() / (Phi * Phi);
  const Mat<Scalar> LtY = params.L.transpose() * f.MinvP;
  const Mat<Scalar> LtZ = params.L.transpose() * f.MinvBtNinv;
  const Vec<Scalar> LtYx = LtY * x;
  const Vec<Scalar> LtZl = LtZ * sol.lambda;
  Mat<Scalar> G = LtY * S * LtY.transpose();
  G.noalias() += (LtYx * LtZl.transpose() + LtZl * LtYx.transpose()) / (Psi * Psi);
  G.noalias() += (gamma2 / (Psi * Psi * vth * vth)) * (LtZ * LtZ.transpose());
  return xi * std::sqrt(spectral_sym(G));
}

template <typename Scalar>
Mat<Scalar> els_form2_matrix(const ElsProblem<Scalar>& p, const EilsSolution<Scalar>& sol,
                             const IntermediateFactors<Scalar>& f, const CondParams<Scalar>& params) {
  const EilsProblem<Scalar> e = p.as_eils();
  check_params(e, params);
  detail::require_scalar_weights(params, "els_kappa2_form2");
  const Scalar Phi = params.Phi.scalar(), Psi = params.Psi.scalar(), beta = params.beta.scalar(),
               vth = params.vartheta.scalar(), xi = params.xi.scalar();
  const Index m = e.m(), n = e.n(), s = e.s();
  const Mat<Scalar> Q = els_form2_Q(p, sol, Phi, Psi, beta, vth);
  const Scalar gamma = std::sqrt(vth * vth * sol.x.squaredNorm() + Psi * Psi);
  const Mat<Scalar> LtY = params.L.transpose() * f.MinvP;
  Mat<Scalar> K(params.L.cols(), m + 3 * n + s);
  K.leftCols(m + 3 * n) = LtY * Q;
  K.rightCols(s) = (gamma / (Psi * vth)) * (params.L.transpose() * f.MinvBtNinv) +
                   (vth / (Psi * gamma)) * (LtY * sol.x) * sol.lambda.transpose();
  return xi * K;
}

template <typename Scalar>
Scalar els_kappa2_form2(const ElsProblem<Scalar>& p, const EilsSolution<Scalar>& sol,
                        const IntermediateFactors<Scalar>& f, const CondParams<Scalar>& params) {
  return spectral(els_form2_matrix(p, sol, f, params));
}

/// Generic Kronecker form: the EILS expression at J = I_m.
template <typename Scalar>
Scalar els_kappa2_kron(const ElsProblem<Scalar>& p, const EilsSolution<Scalar>& sol,
                       const IntermediateFactors<Scalar>& f, const CondParams<Scalar>& params,
                       double cap = default_memory_cap()) {
  return kappa2_kron(p.as_eils(), sol, f, params, cap);
}

/// P^T M^{-1} A^T r; vanishes at the ELS solution.
template <typename Scalar>
Vec<Scalar> els_cross_term(const ElsProblem<Scalar>& p, const EilsSolution<Scalar>& sol,
                           const IntermediateFactors<Scalar>& f) {
  return f.MinvP.transpose() * (p.A.transpose() * sol.r);
}

}  // namespace eilscond
