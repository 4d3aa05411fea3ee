#pragma once

// Projected condition numbers of the EILS solution map.
//
// The Frechet derivative, written against vec(dA, dB, db, dd), is
//
//   M_F = [Gamma, -Omega, -P^T M^{-1} A^T J, M^{-1} B^T N^{-1}]
//   Gamma = x^T (x) (P^T M^{-1} A^T J) - (M^{-1} P) (x) (Jr)^T
//   Omega = (M^{-1} P) (x) lambda^T + x^T (x) (M^{-1} B^T N^{-1})
//
// and kappa = || xi o (L^T M_F diag(vec(Phi, Psi, beta, vartheta)^ddag)) ||
// for the (2,2) or (inf,inf) operator norm. L^T M_F has k x (n+1)(m+s)
// entries; only build_MF and kappa2_kron materialize it, and both are guarded.

#include <Eigen/Dense>

#include <cmath>
#include <cstdlib>
#include <string>
#include <variant>

#include "eilscond/densela.hpp"
#include "eilscond/errors.hpp"
#include "eilscond/problem.hpp"

namespace eilscond {

inline constexpr double kDefaultMemoryCap = 2e8;

/// Entry cap for explicit Kronecker-form matrices; EILSCOND_MEMORY_CAP overrides it.
inline double default_memory_cap() {
  if (const char* env = std::getenv("EILSCOND_MEMORY_CAP")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end != env && v > 0) return v;
  }
  return kDefaultMemoryCap;
}

/// A perturbation weight: one positive number, or one entry per datum.
template <typename Scalar>
class Weight {
 public:
  Weight(Scalar value = Scalar(1)) : value_(value) {}
  Weight(Mat<Scalar> entries) : value_(std::move(entries)) {}

  bool is_scalar() const { return std::holds_alternative<Scalar>(value_); }
  Scalar scalar() const { return std::get<Scalar>(value_); }
  const Mat<Scalar>& array() const { return std::get<Mat<Scalar>>(value_); }

  /// |w^ddag| laid out as a rows x cols matrix.
  Mat<Scalar> abs_ddag(Index rows, Index cols) const {
    if (is_scalar()) return Mat<Scalar>::Constant(rows, cols, std::abs(ddag(scalar())));
    if (array().rows() != rows || array().cols() != cols) throw ShapeMismatch("Weight: array shape mismatch");
    return ddag(array()).cwiseAbs();
  }

  void check(Index rows, Index cols, const char* name) const {
    if (is_scalar()) {
      if (!(scalar() > 0)) throw InvalidArgument(std::string(name) + ": scalar weight must be positive");
      return;
    }
    if (array().rows() != rows || array().cols() != cols)
      throw ShapeMismatch(std::string(name) + ": weight array has the wrong shape");
    if ((array().array() == Scalar(0)).any())
      throw InvalidArgument(std::string(name) + ": weight arrays must have nonzero entries");
  }

 private:
  std::variant<Scalar, Mat<Scalar>> value_;
};

template <typename Scalar>
struct CondParams {
  Mat<Scalar> L;            // n x k, rank k
  Weight<Scalar> Phi;       // on dA  (m x n)
  Weight<Scalar> Psi;       // on dB  (s x n)
  Weight<Scalar> beta;      // on db  (m)
  Weight<Scalar> vartheta;  // on dd  (s)
  Weight<Scalar> xi;        // on L^T dx (k)

  bool all_scalar() const {
    return Phi.is_scalar() && Psi.is_scalar() && beta.is_scalar() && vartheta.is_scalar() && xi.is_scalar();
  }
};

enum class CondPreset {
  NormwiseRelative2,  // weights 1/|(A,B,b,d)|_F, xi = 1/|L^T x|_2
  MixedInf,           // weights (A,B,b,d)^ddag, xi = 1/|L^T x|_inf
  ComponentwiseInf,   // weights (A,B,b,d)^ddag, xi = (L^T x)^ddag
  AbsoluteUnit,       // all ones
};

template <typename Scalar>
void check_projection(const Mat<Scalar>& L, Index n) {
  if (L.rows() != n) throw ShapeMismatch("L must have n rows");
  if (L.cols() < 1 || L.cols() > n) throw InvalidArgument("L must have between 1 and n columns");
  Eigen::BDCSVD<Mat<Scalar>> svd(L);
  const auto& sv = svd.singularValues();
  const Scalar tol = Scalar(std::max(L.rows(), L.cols())) * std::numeric_limits<Scalar>::epsilon() * sv(0);
  if (!(sv(sv.size() - 1) > tol)) throw InvalidArgument("L must have full column rank");
}

template <typename Scalar>
void check_params(const EilsProblem<Scalar>& prob, const CondParams<Scalar>& params) {
  const Index m = prob.m(), n = prob.n(), s = prob.s();
  check_projection(params.L, n);
  params.Phi.check(m, n, "Phi");
  params.Psi.check(s, n, "Psi");
  params.beta.check(m, 1, "beta");
  params.vartheta.check(s, 1, "vartheta");
  if (params.xi.is_scalar()) {
    if (!(params.xi.scalar() > 0)) throw InvalidArgument("xi: scalar weight must be positive");
  } else if (params.xi.array().rows() != params.L.cols() || params.xi.array().cols() != 1) {
    throw ShapeMismatch("xi: weight array must have k entries");
  }
}

/// Expands a preset into concrete weights for the given solution and projection.
template <typename Scalar>
CondParams<Scalar> make_params(CondPreset preset, const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                               const Mat<Scalar>& L) {
  CondParams<Scalar> params;
  params.L = L;
  const Vec<Scalar> Ltx = L.transpose() * sol.x;
  switch (preset) {
    case CondPreset::NormwiseRelative2: {
      const Scalar dn = prob.data_norm();
      const Scalar w = dn > 0 ? Scalar(1) / dn : Scalar(1);
      params.Phi = params.Psi = params.beta = params.vartheta = Weight<Scalar>(w);
      const Scalar nx = Ltx.norm();
      if (nx == 0) throw DegenerateProjection("L^T x = 0: relative normwise condition number undefined");
      params.xi = Weight<Scalar>(Scalar(1) / nx);
      break;
    }
    case CondPreset::MixedInf:
    case CondPreset::ComponentwiseInf: {
      params.Phi = Weight<Scalar>(Mat<Scalar>(ddag(prob.A)));
      params.Psi = Weight<Scalar>(Mat<Scalar>(ddag(prob.B)));
      params.beta = Weight<Scalar>(Mat<Scalar>(ddag(prob.b)));
      params.vartheta = Weight<Scalar>(Mat<Scalar>(ddag(prob.d)));
      if (preset == CondPreset::MixedInf) {
        const Scalar nx = vecinf(Ltx);
        if (nx == 0) throw DegenerateProjection("L^T x = 0: mixed condition number undefined");
        params.xi = Weight<Scalar>(Scalar(1) / nx);
      } else {
        params.xi = Weight<Scalar>(Mat<Scalar>(ddag(Ltx)));
      }
      break;
    }
    case CondPreset::AbsoluteUnit:
      params.Phi = params.Psi = params.beta = params.vartheta = params.xi = Weight<Scalar>(Scalar(1));
      break;
  }
  return params;
}

/// The projected pieces every form is built from.
template <typename Scalar>
struct ProjectedBlocks {
  Mat<Scalar> LtX;  // L^T P^T M^{-1} A^T J, k x m
  Mat<Scalar> LtY;  // L^T M^{-1} P,         k x n
  Mat<Scalar> LtZ;  // L^T M^{-1} B^T N^{-1}, k x s
  Vec<Scalar> Jr;
};

template <typename Scalar>
ProjectedBlocks<Scalar> project_blocks(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                                       const IntermediateFactors<Scalar>& f, const Mat<Scalar>& L) {
  ProjectedBlocks<Scalar> pb;
  pb.LtX = L.transpose() * f.PtMinvAtJ;
  pb.LtY = L.transpose() * f.MinvP;
  pb.LtZ = L.transpose() * f.MinvBtNinv;
  pb.Jr = prob.J.apply(sol.r);
  return pb;
}

namespace detail {

inline void guard_entries(double entries, double cap, const char* what) {
  if (entries > cap) {
    throw MemoryGuardRefused(std::string(what) + ": explicit Kronecker form needs " + std::to_string(entries) +
                                 " entries (~" + std::to_string(entries * 8.0 / 1e9) + " GB), above the cap of " +
                                 std::to_string(cap) +
                                 "; the computation breaks down due to the lack of memory, use a compact form",
                             entries, cap);
  }
}

/// Columns j*U.cols() + i equal alpha_j U(:, i) + V(:, j) beta_i, i.e. the
/// product L^T (alpha^T (x) X + Y (x) beta^T) with U = L^T X, V = L^T Y.
template <typename Scalar>
Mat<Scalar> kron_pair_block(const Mat<Scalar>& U, const Mat<Scalar>& V, const Vec<Scalar>& alpha,
                            const Vec<Scalar>& beta) {
  const Index k = U.rows(), mu = U.cols(), n = alpha.size();
  Mat<Scalar> out(k, n * mu);
  for (Index j = 0; j < n; ++j) out.middleCols(j * mu, mu) = alpha(j) * U + V.col(j) * beta.transpose();
  return out;
}

/// Row sums of |kron_pair_block(U, V, alpha, beta)| * vec(W), one column block at a time.
template <typename Scalar>
Vec<Scalar> kron_pair_abs_rowsum(const Mat<Scalar>& U, const Mat<Scalar>& V, const Vec<Scalar>& alpha,
                                 const Vec<Scalar>& beta, const Mat<Scalar>& W) {
  const Index k = U.rows();
  Vec<Scalar> acc = Vec<Scalar>::Zero(k);
  Mat<Scalar> block(k, U.cols());
  for (Index j = 0; j < alpha.size(); ++j) {
    block.noalias() = alpha(j) * U;
    block.noalias() += V.col(j) * beta.transpose();
    acc.noalias() += block.cwiseAbs() * W.col(j);
  }
  return acc;
}

template <typename Scalar>
Vec<Scalar> abs_xi(const Weight<Scalar>& xi, Index k) {
  return xi.is_scalar() ? Vec<Scalar>::Constant(k, std::abs(xi.scalar())) : Vec<Scalar>(xi.array().cwiseAbs());
}

}  // namespace detail

/// L^T M_F, shape k x (n+1)(m+s), blocks [Gamma, -Omega, -P^T M^{-1} A^T J, M^{-1} B^T N^{-1}].
template <typename Scalar>
Mat<Scalar> build_MF(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                     const IntermediateFactors<Scalar>& f, const Mat<Scalar>& L, double cap = default_memory_cap()) {
  const Index m = prob.m(), n = prob.n(), s = prob.s(), k = L.cols();
  if (L.rows() != n) throw ShapeMismatch("build_MF: L must have n rows");
  detail::guard_entries(double(k) * double(n + 1) * double(m + s), cap, "build_MF");
  const ProjectedBlocks<Scalar> pb = project_blocks(prob, sol, f, L);
  Mat<Scalar> out(k, (n + 1) * (m + s));
  out.leftCols(n * m) = detail::kron_pair_block<Scalar>(pb.LtX, pb.LtY, sol.x, -pb.Jr);
  out.middleCols(n * m, n * s) = -detail::kron_pair_block<Scalar>(pb.LtZ, pb.LtY, sol.x, sol.lambda);
  out.middleCols(n * (m + s), m) = -pb.LtX;
  out.rightCols(s) = pb.LtZ;
  return out;
}

/// diag(|xi|) L^T M_F diag(|vec(Phi, Psi, beta, vartheta)^ddag|), fully materialized.
template <typename Scalar>
Mat<Scalar> build_weighted_MF(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                              const IntermediateFactors<Scalar>& f, const CondParams<Scalar>& params,
                              double cap = default_memory_cap()) {
  check_params(prob, params);
  const Index m = prob.m(), n = prob.n(), s = prob.s(), k = params.L.cols();
  Mat<Scalar> mf = build_MF(prob, sol, f, params.L, cap);
  Vec<Scalar> colw(mf.cols());
  colw << vec(params.Phi.abs_ddag(m, n)), vec(params.Psi.abs_ddag(s, n)), params.beta.abs_ddag(m, 1),
      params.vartheta.abs_ddag(s, 1);
  return detail::abs_xi(params.xi, k).asDiagonal() * mf * colw.asDiagonal();
}

/// Spectral norm of the explicit Kronecker form.
template <typename Scalar>
Scalar kappa2_kron(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                   const IntermediateFactors<Scalar>& f, const CondParams<Scalar>& params,
                   double cap = default_memory_cap()) {
  return spectral(build_weighted_MF(prob, sol, f, params, cap));
}

namespace detail {

template <typename Scalar>
void require_scalar_weights(const CondParams<Scalar>& params, const char* what) {
  if (!params.all_scalar())
    throw InvalidArgument(std::string(what) + ": compact 2-norm forms require scalar weights");
}

}  // namespace detail

/// xi^2 L^T M_paF M_paF^T L, assembled without Kronecker products.
template <typename Scalar>
Mat<Scalar> form1_gram(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                       const IntermediateFactors<Scalar>& f, const CondParams<Scalar>& params) {
  check_params(prob, params);
  detail::require_scalar_weights(params, "kappa2_form1");
  const Scalar Phi = params.Phi.scalar(), Psi = params.Psi.scalar(), beta = params.beta.scalar(),
               vth = params.vartheta.scalar(), xi = params.xi.scalar();
  const Vec<Scalar>& x = sol.x;
  const Scalar xx = x.squaredNorm(), rr = sol.r.squaredNorm(), ll = sol.lambda.squaredNorm();

  const Vec<Scalar> Atr = prob.A.transpose() * sol.r;
  Mat<Scalar> S = (xx / (Phi * Phi) + Scalar(1) / (beta * beta)) * (prob.A.transpose() * prob.A);
  S.diagonal().array() += ll / (Psi * Psi) + rr / (Phi * Phi);
  S.noalias() -= (x * Atr.transpose() + Atr * x.transpose()) / (Phi * Phi);

  const Mat<Scalar> LtY = params.L.transpose() * f.MinvP;
  const Mat<Scalar> LtZ = params.L.transpose() * f.MinvBtNinv;
  const Vec<Scalar> LtYx = LtY * x;
  const Vec<Scalar> LtZl = LtZ * sol.lambda;
  Mat<Scalar> G = LtY * S * LtY.transpose();
  G.noalias() += (LtYx * LtZl.transpose() + LtZl * LtYx.transpose()) / (Psi * Psi);
  G.noalias() += (xx / (Psi * Psi) + Scalar(1) / (vth * vth)) * (LtZ * LtZ.transpose());
  return xi * xi * G;
}

template <typename Scalar>
Scalar kappa2_form1(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                    const IntermediateFactors<Scalar>& f, const CondParams<Scalar>& params) {
  return std::sqrt(spectral_sym(form1_gram(prob, sol, f, params)));
}

/// The n x (m + 4n) factor Q with Q Q^T = S - theta^2 |lambda|^2 / (Psi^2 gamma^2) x x^T.
template <typename Scalar>
Mat<Scalar> form2_Q(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol, Scalar Phi, Scalar Psi,
                    Scalar beta, Scalar vth) {
  const Index m = prob.m(), n = prob.n();
  const Vec<Scalar>& x = sol.x;
  const Scalar nx = x.norm(), nr = sol.r.norm(), nl = sol.lambda.norm();
  if (nx == 0) throw ZeroSolution("x = 0: the projector P_x is undefined");
  const Scalar zeta = std::sqrt(beta * beta * nx * nx + Phi * Phi);
  const Scalar gamma = std::sqrt(vth * vth * nx * nx + Psi * Psi);
  Mat<Scalar> Px = Mat<Scalar>::Identity(n, n) - x * x.transpose() / (nx * nx);
  const Mat<Scalar> I = Mat<Scalar>::Identity(n, n);
  Mat<Scalar> Q(n, m + 4 * n);
  Q.leftCols(m) = (zeta / (Phi * beta)) * prob.A.transpose() - (beta / (zeta * Phi)) * x * sol.r.transpose();
  Q.middleCols(m, n) = (nr / zeta) * I;
  Q.middleCols(m + n, n) = (beta * nr * nx / (zeta * Phi)) * Px;
  Q.middleCols(m + 2 * n, n) = (nl / gamma) * I;
  Q.middleCols(m + 3 * n, n) = (vth * nl * nx / (gamma * Psi)) * Px;
  return Q;
}

/// xi L^T [M^{-1} P Q, (gamma/(Psi vartheta)) M^{-1}B^T N^{-1} + (vartheta/(Psi gamma)) M^{-1} P x lambda^T],
/// shape k x (4n + m + s).
template <typename Scalar>
Mat<Scalar> form2_matrix(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                         const IntermediateFactors<Scalar>& f, const CondParams<Scalar>& params) {
  check_params(prob, params);
  detail::require_scalar_weights(params, "kappa2_form2");
  const Scalar Phi = params.Phi.scalar(), Psi = params.Psi.scalar(), beta = params.beta.scalar(),
               vth = params.vartheta.scalar(), xi = params.xi.scalar();
  const Index m = prob.m(), n = prob.n(), s = prob.s();
  const Mat<Scalar> Q = form2_Q(prob, sol, Phi, Psi, beta, vth);
  const Scalar gamma = std::sqrt(vth * vth * sol.x.squaredNorm() + Psi * Psi);
  const Mat<Scalar> LtY = params.L.transpose() * f.MinvP;
  Mat<Scalar> K(params.L.cols(), 4 * n + m + s);
  K.leftCols(m + 4 * n) = LtY * Q;
  K.rightCols(s) = (gamma / (Psi * vth)) * (params.L.transpose() * f.MinvBtNinv) +
                   (vth / (Psi * gamma)) * (LtY * sol.x) * sol.lambda.transpose();
  return xi * K;
}

struct Form2Options {
  /// When x = 0, return kappa2_form1 instead of throwing ZeroSolution.
  bool zero_solution_fallback = false;
};

template <typename Scalar>
Scalar kappa2_form2(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                    const IntermediateFactors<Scalar>& f, const CondParams<Scalar>& params,
                    Form2Options opts = {}) {
  if (sol.x.norm() == 0 && opts.zero_solution_fallback) return kappa2_form1(prob, sol, f, params);
  return spectral(form2_matrix(prob, sol, f, params));
}

/// |L^T M_F| |vec(Phi, Psi, beta, vartheta)^ddag|, streamed one column block at a time.
template <typename Scalar>
Vec<Scalar> weighted_abs_rowsum(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                                const IntermediateFactors<Scalar>& f, const CondParams<Scalar>& params) {
  check_params(prob, params);
  const Index m = prob.m(), n = prob.n(), s = prob.s();
  const ProjectedBlocks<Scalar> pb = project_blocks(prob, sol, f, params.L);
  Vec<Scalar> h = detail::kron_pair_abs_rowsum<Scalar>(pb.LtX, pb.LtY, sol.x, -pb.Jr, params.Phi.abs_ddag(m, n));
  h += detail::kron_pair_abs_rowsum<Scalar>(pb.LtZ, pb.LtY, sol.x, sol.lambda, params.Psi.abs_ddag(s, n));
  h += pb.LtX.cwiseAbs() * params.beta.abs_ddag(m, 1);
  h += pb.LtZ.cwiseAbs() * params.vartheta.abs_ddag(s, 1);
  return h;
}

/// || |xi| o (|L^T M_F| |vec(Phi, Psi, beta, vartheta)^ddag|) ||_inf
template <typename Scalar>
Scalar kappa_inf(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                 const IntermediateFactors<Scalar>& f, const CondParams<Scalar>& params) {
  const Vec<Scalar> h = weighted_abs_rowsum(prob, sol, f, params);
  return vecinf(Vec<Scalar>(detail::abs_xi(params.xi, params.L.cols()).cwiseProduct(h)));
}

/// || xi o (L^T M_F diag(vec(...)^ddag)) ||_inf from the explicit matrix.
template <typename Scalar>
Scalar kappa_inf_materialized(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                              const IntermediateFactors<Scalar>& f, const CondParams<Scalar>& params,
                              double cap = default_memory_cap()) {
  return inf_norm(build_weighted_MF(prob, sol, f, params, cap));
}

template <typename Scalar>
struct MixedComp {
  Scalar mixed = 0;
  Scalar comp = 0;
};

namespace detail {

template <typename Scalar>
MixedComp<Scalar> mixed_comp_from_rows(const Vec<Scalar>& h, const Vec<Scalar>& Ltx) {
  MixedComp<Scalar> out;
  const Scalar nx = vecinf(Ltx);
  out.comp = vecinf(Vec<Scalar>(entrywise_div(h, Vec<Scalar>(Ltx.cwiseAbs()))));
  if (nx == 0) {
    out.mixed = std::numeric_limits<Scalar>::quiet_NaN();
  } else {
    out.mixed = vecinf(h) / nx;
  }
  return out;
}

template <typename Scalar>
void require_nonzero_projection(const Vec<Scalar>& Ltx) {
  if (vecinf(Ltx) == 0) throw DegenerateProjection("L^T x = 0: mixed condition number undefined");
}

}  // namespace detail

/// Exact projected mixed and componentwise condition numbers (weights (A,B,b,d)^ddag).
/// The mixed value is NaN when L^T x = 0.
template <typename Scalar>
MixedComp<Scalar> mixed_comp_exact(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                                   const IntermediateFactors<Scalar>& f, const Mat<Scalar>& L) {
  check_projection(L, prob.n());
  const ProjectedBlocks<Scalar> pb = project_blocks(prob, sol, f, L);
  Vec<Scalar> h = detail::kron_pair_abs_rowsum<Scalar>(pb.LtX, pb.LtY, sol.x, -pb.Jr, abs_ddag2(prob.A));
  h += detail::kron_pair_abs_rowsum<Scalar>(pb.LtZ, pb.LtY, sol.x, sol.lambda, abs_ddag2(prob.B));
  h += pb.LtX.cwiseAbs() * abs_ddag2(prob.b);
  h += pb.LtZ.cwiseAbs() * abs_ddag2(prob.d);
  return detail::mixed_comp_from_rows<Scalar>(h, L.transpose() * sol.x);
}

template <typename Scalar>
Scalar kappa_mixed(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                   const IntermediateFactors<Scalar>& f, const Mat<Scalar>& L) {
  detail::require_nonzero_projection<Scalar>(L.transpose() * sol.x);
  return mixed_comp_exact(prob, sol, f, L).mixed;
}

template <typename Scalar>
Scalar kappa_comp(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                  const IntermediateFactors<Scalar>& f, const Mat<Scalar>& L) {
  return mixed_comp_exact(prob, sol, f, L).comp;
}

/// M_mc^Ubd = |L^T M^{-1}B^T N^{-1}| (|d~| + |B~||x|) + |L^T P^T M^{-1} A^T J| (|b~| + |A~||x|)
///          + |L^T M^{-1} P| (|B~^T||lambda| + |A~^T||Jr|),   with X~ = (X^ddag)^ddag.
template <typename Scalar>
Vec<Scalar> upper_bound_vector(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                               const IntermediateFactors<Scalar>& f, const Mat<Scalar>& L) {
  const ProjectedBlocks<Scalar> pb = project_blocks(prob, sol, f, L);
  const Mat<Scalar> At = abs_ddag2(prob.A);
  const Mat<Scalar> Bt = abs_ddag2(prob.B);
  const Vec<Scalar> ax = sol.x.cwiseAbs();
  Vec<Scalar> u = pb.LtZ.cwiseAbs() * (abs_ddag2(prob.d) + Bt * ax);
  u += pb.LtX.cwiseAbs() * (abs_ddag2(prob.b) + At * ax);
  u += pb.LtY.cwiseAbs() * (Bt.transpose() * sol.lambda.cwiseAbs() + At.transpose() * pb.Jr.cwiseAbs());
  return u;
}

template <typename Scalar>
MixedComp<Scalar> upper_bounds(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                               const IntermediateFactors<Scalar>& f, const Mat<Scalar>& L) {
  check_projection(L, prob.n());
  return detail::mixed_comp_from_rows<Scalar>(upper_bound_vector(prob, sol, f, L), L.transpose() * sol.x);
}

template <typename Scalar>
Scalar upper_bound_mixed(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                         const IntermediateFactors<Scalar>& f, const Mat<Scalar>& L) {
  detail::require_nonzero_projection<Scalar>(L.transpose() * sol.x);
  return upper_bounds(prob, sol, f, L).mixed;
}

template <typename Scalar>
Scalar upper_bound_comp(const EilsProblem<Scalar>& prob, const EilsSolution<Scalar>& sol,
                        const IntermediateFactors<Scalar>& f, const Mat<Scalar>& L) {
  return upper_bounds(prob, sol, f, L).comp;
}

}  // namespace eilscond
