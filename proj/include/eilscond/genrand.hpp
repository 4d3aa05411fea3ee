#pragma once

// Seeded random EILS problems with controlled conditioning:
//
//   A = H D [Q2; Q1],   B = [K, 0] [Q1; Q2] = K Q1,
//
// H J-orthogonal, D geometric diagonal, Q Haar orthogonal (Q1 = first s rows),
// K lower triangular with a prescribed condition number.
//
// Random numbers come from SplitMix64 used in counter mode: output i of
// substream t under seed s is mix64(key(s, t) + (i + 1) * golden). Substreams
// are independent keys, so every matrix of a problem has its own stream.
// Bit-identity holds on one platform; normal deviates go through
// std::normal_distribution, whose algorithm is implementation defined.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "eilscond/densela.hpp"
#include "eilscond/errors.hpp"
#include "eilscond/problem.hpp"

namespace eilscond {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Counter-based SplitMix64; a UniformRandomBitGenerator.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0)
      : key_(mix64(seed ^ mix64(stream * kGolden + 0x2545F4914F6CDD1Dull))), counter_(0) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix64(key_ + (++counter_) * kGolden); }

  /// A fresh generator on substream `stream` of the same seed.
  Rng substream(std::uint64_t stream) const {
    Rng out;
    out.key_ = mix64(key_ ^ mix64((stream + 1) * kGolden));
    return out;
  }

  std::uint64_t counter() const { return counter_; }

  double normal() { return normal_(*this); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(*this); }

  MatrixXd normal_matrix(Index rows, Index cols) {
    MatrixXd out(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) out(i, j) = normal();
    return out;
  }

  MatrixXd uniform_matrix(Index rows, Index cols, double lo, double hi) {
    MatrixXd out(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) out(i, j) = uniform(lo, hi);
    return out;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
  std::normal_distribution<double> normal_;
};

/// Haar orthogonal matrix: Q factor of a Gaussian matrix, columns signed so diag(R) > 0.
inline MatrixXd gen_orthogonal(Index n, Rng& rng) {
  if (n < 1) throw InvalidArgument("gen_orthogonal: n must be positive");
  const MatrixXd g = rng.normal_matrix(n, n);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ();
  const MatrixXd& r = qr.matrixQR();
  for (Index j = 0; j < n; ++j)
    if (r(j, j) < 0) q.col(j) *= -1;
  return q;
}

inline MatrixXd gen_orthogonal(Index n, std::uint64_t seed) {
  Rng rng(seed);
  return gen_orthogonal(n, rng);
}

/// ln(10)/2: a single hyperbolic rotation at this angle has condition number 10.
inline const double kDefaultHyperbolicCap = std::log(10.0) / 2.0;

/// H with H^T J H = J, J = diag(I_p, -I_q):
/// blockdiag(U1, U2) * prod_i G_i(theta_i) * blockdiag(V1, V2), where G_i is the
/// hyperbolic rotation in the (i, p+i) plane and theta_i ~ U[0, cap]. The
/// rotations act on disjoint planes, so kappa_2(H) = exp(2 max theta_i).
inline MatrixXd gen_j_orthogonal(Index p, Index q, Rng& rng, double cap = kDefaultHyperbolicCap) {
  if (p < 0 || q < 0 || p + q < 1) throw InvalidArgument("gen_j_orthogonal: need p, q >= 0 and p + q >= 1");
  if (!(cap >= 0)) throw InvalidArgument("gen_j_orthogonal: angle cap must be nonnegative");
  const Index m = p + q;
  auto block_orth = [&]() {
    MatrixXd u = MatrixXd::Zero(m, m);
    if (p > 0) u.topLeftCorner(p, p) = gen_orthogonal(p, rng);
    if (q > 0) u.bottomRightCorner(q, q) = gen_orthogonal(q, rng);
    return u;
  };
  const MatrixXd left = block_orth();
  const MatrixXd right = block_orth();
  MatrixXd g = MatrixXd::Identity(m, m);
  for (Index i = 0; i < std::min(p, q); ++i) {
    const double theta = rng.uniform(0.0, cap);
    const double c = std::cosh(theta), s = std::sinh(theta);
    g(i, i) = c;
    g(p + i, p + i) = c;
    g(i, p + i) = s;
    g(p + i, i) = s;
  }
  return left * g * right;
}

inline MatrixXd gen_j_orthogonal(Index p, Index q, std::uint64_t seed, double cap = kDefaultHyperbolicCap) {
  Rng rng(seed);
  return gen_j_orthogonal(p, q, rng, cap);
}

/// m x n with d_ii = kappaA^{(n-1-i)/(n-1)}, i = 0..n-1.
inline MatrixXd gen_geometric_diag(Index m, Index n, double kappaA) {
  if (!(kappaA >= 1)) throw InvalidArgument("gen_geometric_diag: kappaA must be >= 1");
  if (n < 1 || m < n) throw InvalidArgument("gen_geometric_diag: need m >= n >= 1");
  MatrixXd d = MatrixXd::Zero(m, n);
  for (Index i = 0; i < n; ++i)
    d(i, i) = n == 1 ? kappaA : std::pow(kappaA, double(n - 1 - i) / double(n - 1));
  return d;
}

/// Geometric singular values from kappa down to 1.
inline VectorXd geometric_values(Index s, double kappa) {
  VectorXd sv(s);
  for (Index i = 0; i < s; ++i) sv(i) = s == 1 ? 1.0 : std::pow(kappa, double(s - 1 - i) / double(s - 1));
  return sv;
}

/// s x s lower-triangular K with the given singular values: the transposed R
/// factor of the QR of (U diag(sv) V^T)^T.
inline MatrixXd gen_tri_cond(const VectorXd& sv, Rng& rng) {
  const Index s = sv.size();
  if (s < 1) throw InvalidArgument("gen_tri_cond: s must be positive");
  if ((sv.array() <= 0).any()) throw InvalidArgument("gen_tri_cond: singular values must be positive");
  const MatrixXd u = gen_orthogonal(s, rng);
  const MatrixXd v = gen_orthogonal(s, rng);
  const MatrixXd c = u * sv.asDiagonal() * v.transpose();
  Eigen::HouseholderQR<MatrixXd> qr(c.transpose());
  const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  return r.transpose();
}

inline MatrixXd gen_tri_cond(Index s, double kappaB, Rng& rng) {
  if (!(kappaB >= 1)) throw InvalidArgument("gen_tri_cond: kappaB must be >= 1");
  return gen_tri_cond(geometric_values(s, kappaB), rng);
}

inline MatrixXd gen_tri_cond(Index s, double kappaB, std::uint64_t seed) {
  Rng rng(seed);
  return gen_tri_cond(s, kappaB, rng);
}

struct GenSpec {
  Index p = 0;
  Index q = 0;
  Index n = 0;
  Index s = 0;
  double kappaA_target = 1;
  double kappaB = 1;
  double omega = 0;
  double tau = 0;
  std::uint64_t seed = 0;
  double hyperbolic_cap = kDefaultHyperbolicCap;
  int max_attempts = 10;

  Index m() const { return p + q; }

  void check() const {
    if (p < 0 || q < 0 || n < 1 || s < 1) throw InvalidArgument("GenSpec: need p, q >= 0 and n, s >= 1");
    if (!(s <= n && n <= m())) throw InvalidArgument("GenSpec: need s <= n <= p + q");
    if (p < n - s) throw InvalidArgument("GenSpec: need p >= n - s");
    if (!(kappaA_target >= 1) || !(kappaB >= 1)) throw InvalidArgument("GenSpec: condition targets must be >= 1");
    if (!(omega >= 0)) throw InvalidArgument("GenSpec: omega must be nonnegative");
    if (!std::isfinite(tau)) throw InvalidArgument("GenSpec: tau must be finite");
  }
};

struct GeneratedProblem {
  EilsProblem<double> problem;
  VectorXd x_true;
  VectorXd r_true;
  VectorXd lambda_true;
  MatrixXd H;
  MatrixXd K;
  int attempts = 0;
};

namespace detail {

inline GeneratedProblem gen_problem_once(const GenSpec& spec, Rng& rng) {
  const Index p = spec.p, q = spec.q, m = spec.m(), n = spec.n, s = spec.s;
  GeneratedProblem g;
  Rng rq = rng.substream(0), rh = rng.substream(1), rk = rng.substream(2), rx = rng.substream(3),
      rr = rng.substream(4);
  const MatrixXd Q = gen_orthogonal(n, rq);
  const MatrixXd Q1 = Q.topRows(s);
  const MatrixXd Q2 = Q.bottomRows(n - s);
  MatrixXd stacked(n, n);
  stacked << Q2, Q1;
  g.H = gen_j_orthogonal(p, q, rh, spec.hyperbolic_cap);
  const MatrixXd D = gen_geometric_diag(m, n, spec.kappaA_target);
  g.K = gen_tri_cond(s, spec.kappaB, rk);

  EilsProblem<double>& prob = g.problem;
  prob.J = SignatureMatrix{p, q};
  prob.A = g.H * D * stacked;
  prob.B = g.K * Q1;

  if (n > s) {
    g.x_true = Q2.transpose() * rx.normal_matrix(n - s, 1);
  } else {
    g.x_true = rx.normal_matrix(n, 1);
  }
  const double nx = g.x_true.norm();
  if (nx > 0) g.x_true /= nx;
  prob.d = prob.B * g.x_true;

  // r = H J w with w(0:n-s) = 0 gives A^T J r = [Q2; Q1]^T D^T w in range(B^T),
  // so x_true is the exact minimizer.
  VectorXd w = rr.normal_matrix(m, 1);
  w.head(n - s).setZero();
  VectorXd r = g.H * prob.J.apply(w);
  const double nr = r.norm();
  g.r_true = (nr > 0 && spec.omega > 0) ? VectorXd(r * (spec.omega / nr)) : VectorXd(VectorXd::Zero(m));
  prob.b = prob.A * g.x_true + g.r_true;

  // B^T lambda = -A^T J r  <=>  K^T lambda = -Q1 A^T J r
  const VectorXd AtJr = prob.A.transpose() * prob.J.apply(g.r_true);
  g.lambda_true = -g.K.transpose().triangularView<Eigen::Upper>().solve(Q1 * AtJr);
  return g;
}

}  // namespace detail

/// Builds and validates a problem; a failed validation retries on the next substream.
inline GeneratedProblem gen_problem(const GenSpec& spec) {
  spec.check();
  const Rng root(spec.seed);
  std::string last;
  for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
    Rng rng = root.substream(std::uint64_t(attempt));
    GeneratedProblem g = detail::gen_problem_once(spec, rng);
    const auto rep = validate(g.problem);
    if (rep.passed) {
      g.attempts = attempt + 1;
      return g;
    }
    last = rep.reason;
  }
  throw AssumptionViolated("gen_problem: no valid problem after " + std::to_string(spec.max_attempts) +
                           " attempts: " + last);
}

/// Multiplies columns `cols` of A by 10^{-tau} and rows `rows` of B by 10^{tau}.
template <typename Scalar>
EilsProblem<Scalar> scale_problem(const EilsProblem<Scalar>& prob, double tau, const std::vector<Index>& cols,
                                  const std::vector<Index>& rows) {
  EilsProblem<Scalar> out = prob;
  const Scalar down = std::pow(Scalar(10), Scalar(-tau));
  const Scalar up = std::pow(Scalar(10), Scalar(tau));
  for (Index c : cols) {
    if (c < 0 || c >= prob.n()) throw InvalidArgument("scale_problem: column index out of range");
    out.A.col(c) *= down;
  }
  for (Index r : rows) {
    if (r < 0 || r >= prob.s()) throw InvalidArgument("scale_problem: row index out of range");
    out.B.row(r) *= up;
  }
  return out;
}

/// Default scaling: the last three columns of A and the first three rows of B.
template <typename Scalar>
EilsProblem<Scalar> scale_problem(const EilsProblem<Scalar>& prob, double tau) {
  if (prob.n() < 3 || prob.s() < 3) throw InvalidArgument("scale_problem: needs n >= 3 and s >= 3");
  const Index n = prob.n();
  return scale_problem(prob, tau, {n - 3, n - 2, n - 1}, {0, 1, 2});
}

struct PerturbationSpec {
  double epsilon = 1e-9;
  std::uint64_t seed = 0;
};

struct Perturbation {
  EilsProblem<double> perturbed;
  MatrixXd dA, dB;
  VectorXd db, dd;
  double delta_rF = 0;    // |(dA,dB,db,dd)|_F / |(A,B,b,d)|_F
  double delta_rmax = 0;  // |(dA,dB,db,dd) / (A,B,b,d)|_max
};

/// dA = eps E o A, dB = eps F o B, db = eps g o b, dd = eps h o d; masks U[-1, 1].
inline Perturbation perturb(const EilsProblem<double>& prob, const PerturbationSpec& ps) {
  if (!(ps.epsilon >= 0)) throw InvalidArgument("perturb: epsilon must be nonnegative");
  Rng root(ps.seed);
  Rng ra = root.substream(0), rb = root.substream(1), rvb = root.substream(2), rvd = root.substream(3);
  Perturbation out;
  out.dA = ps.epsilon * ra.uniform_matrix(prob.m(), prob.n(), -1, 1).cwiseProduct(prob.A);
  out.dB = ps.epsilon * rb.uniform_matrix(prob.s(), prob.n(), -1, 1).cwiseProduct(prob.B);
  out.db = ps.epsilon * rvb.uniform_matrix(prob.m(), 1, -1, 1).cwiseProduct(prob.b);
  out.dd = ps.epsilon * rvd.uniform_matrix(prob.s(), 1, -1, 1).cwiseProduct(prob.d);
  out.perturbed = prob;
  out.perturbed.A += out.dA;
  out.perturbed.B += out.dB;
  out.perturbed.b += out.db;
  out.perturbed.d += out.dd;
  const double num = std::sqrt(out.dA.squaredNorm() + out.dB.squaredNorm() + out.db.squaredNorm() +
                               out.dd.squaredNorm());
  const double den = prob.data_norm();
  out.delta_rF = den > 0 ? num / den : 0.0;
  out.delta_rmax = std::max({max_norm(entrywise_div(out.dA, prob.A)), max_norm(entrywise_div(out.dB, prob.B)),
                             max_norm(entrywise_div(out.db, prob.b)), max_norm(entrywise_div(out.dd, prob.d))});
  return out;
}

}  // namespace eilscond
