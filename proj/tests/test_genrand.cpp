#include "doctest.h"

#include <set>

#include "eilscond/genrand.hpp"
#include "test_util.hpp"

using namespace eilscond;
using eilscond::test::rel_err;

TEST_CASE("counter-based generator") {
  Rng a(5), b(5), c(6);
  CHECK(a() == b());
  CHECK(a() != c());
  Rng s0 = Rng(5).substream(0), s0b = Rng(5).substream(0), s1 = Rng(5).substream(1);
  CHECK(s0() == s0b());
  CHECK(Rng(5).substream(0)() != s1());
  std::set<std::uint64_t> seen;
  Rng r(1);
  for (int i = 0; i < 1000; ++i) seen.insert(r());
  CHECK(seen.size() == 1000);
  const double u = Rng(2).uniform(-1, 1);
  CHECK((u >= -1 && u < 1));
}

TEST_CASE("random orthogonal matrices") {
  for (Index n : {1, 2, 5, 17}) {
    const MatrixXd q = gen_orthogonal(n, std::uint64_t(n));
    CHECK(max_norm(MatrixXd(q.transpose() * q - MatrixXd::Identity(n, n))) <= 1e-13);
    CHECK(std::abs(std::abs(q.determinant()) - 1) <= 1e-12);
  }
  CHECK(gen_orthogonal(4, 9) == gen_orthogonal(4, 9));
  CHECK_THROWS_AS(gen_orthogonal(0, 1), InvalidArgument);
}

TEST_CASE("J-orthogonal matrices") {
  for (auto [p, q] : {std::pair<Index, Index>{3, 2}, {5, 5}, {2, 6}, {4, 0}, {0, 3}}) {
    const SignatureMatrix J{p, q};
    const MatrixXd Jd = J.dense<double>();
    const MatrixXd H = gen_j_orthogonal(p, q, std::uint64_t(p * 10 + q));
    CHECK(max_norm(MatrixXd(H.transpose() * Jd * H - Jd)) <= 1e-12);
    CHECK(cond2(H) <= 10 * (1 + 1e-10));
    if (q == 0 || p == 0) CHECK(max_norm(MatrixXd(H.transpose() * H - MatrixXd::Identity(p + q, p + q))) <= 1e-12);
  }
  // cap 0: plain block-orthogonal
  const MatrixXd H = gen_j_orthogonal(3, 3, std::uint64_t(1), 0.0);
  CHECK(max_norm(MatrixXd(H.transpose() * H - MatrixXd::Identity(6, 6))) <= 1e-12);
  CHECK_THROWS_AS(gen_j_orthogonal(0, 0, std::uint64_t(1)), InvalidArgument);
  CHECK_THROWS_AS(gen_j_orthogonal(2, 2, std::uint64_t(1), -1.0), InvalidArgument);
}

TEST_CASE("geometric diagonal") {
  const MatrixXd d = gen_geometric_diag(4, 3, 100);
  CHECK(d.rows() == 4);
  CHECK(d(0, 0) == doctest::Approx(100).epsilon(1e-14));
  CHECK(d(1, 1) == doctest::Approx(10).epsilon(1e-14));
  CHECK(d(2, 2) == doctest::Approx(1).epsilon(1e-14));
  CHECK(d.row(3).norm() == 0);
  CHECK(cond2(d) == doctest::Approx(100).epsilon(1e-12));
  CHECK(gen_geometric_diag(2, 1, 7)(0, 0) == 7);
  CHECK_THROWS_AS(gen_geometric_diag(2, 3, 10), InvalidArgument);
  CHECK_THROWS_AS(gen_geometric_diag(3, 2, 0.5), InvalidArgument);
}

TEST_CASE("lower-triangular matrices with a target condition number") {
  for (double kappa : {1.0, 10.0, 1e4}) {
    const MatrixXd k = gen_tri_cond(6, kappa, std::uint64_t(3));
    CHECK(rel_err(cond2(k), kappa) <= 0.05);
    CHECK(MatrixXd(k.triangularView<Eigen::StrictlyUpper>()).norm() == 0);
  }
  CHECK(gen_tri_cond(1, 5.0, std::uint64_t(1)).size() == 1);
  CHECK_THROWS_AS(gen_tri_cond(3, 0.5, std::uint64_t(1)), InvalidArgument);
}

TEST_CASE("generated problems") {
  GenSpec spec;
  spec.p = 12;
  spec.q = 6;
  spec.n = 8;
  spec.s = 3;
  spec.kappaA_target = 100;
  spec.kappaB = 10;
  spec.omega = 0.01;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    spec.seed = seed;
    const auto g = gen_problem(spec);
    const auto& p = g.problem;
    CHECK(p.m() == 18);
    CHECK(validate(p).passed);
    CHECK(g.attempts >= 1);
    CHECK(rel_err(VectorXd(p.B * g.x_true), p.d) <= 1e-13);
    CHECK(rel_err(g.r_true.norm(), spec.omega) <= 1e-13);
    CHECK(rel_err(g.x_true.norm(), 1.0) <= 1e-13);
    CHECK(rel_err(cond2(p.B), spec.kappaB) <= 0.05);
    const double ka = cond2(p.A);
    CHECK(ka >= spec.kappaA_target / 10 * (1 - 1e-10));
    CHECK(ka <= spec.kappaA_target * 10 * (1 + 1e-10));
    const auto sol = solve_augmented(p);
    CHECK(rel_err(sol.x, g.x_true) <= 1e-9);
    CHECK(rel_err(sol.r, g.r_true) <= 1e-6);
  }
  const auto a = gen_problem(spec), b = gen_problem(spec);
  CHECK(a.problem.A == b.problem.A);
  CHECK(a.problem.b == b.problem.b);

  SUBCASE("zero residual") {
    spec.omega = 0;
    const auto g = gen_problem(spec);
    CHECK(g.r_true.norm() == 0);
    CHECK(solve_augmented(g.problem).r.norm() <= 1e-12);
  }
  SUBCASE("n = s") {
    spec.s = spec.n;
    const auto g = gen_problem(spec);
    CHECK(rel_err(solve_augmented(g.problem).x, g.x_true) <= 1e-10);
  }
  SUBCASE("q = 0") {
    spec.q = 0;
    CHECK(validate(gen_problem(spec).problem).passed);
  }
  SUBCASE("invalid specs") {
    spec.p = 2;
    CHECK_THROWS_AS(gen_problem(spec), InvalidArgument);
    spec.p = 12;
    spec.s = 9;
    CHECK_THROWS_AS(gen_problem(spec), InvalidArgument);
    spec.s = 3;
    spec.omega = -1;
    CHECK_THROWS_AS(gen_problem(spec), InvalidArgument);
  }
}

TEST_CASE("column and row scaling") {
  const auto g = test::small_problem(3, 8, 4, 6, 3);
  const auto& p = g.problem;
  CHECK(scale_problem(p, 0.0).A == p.A);
  const auto s4 = scale_problem(p, 4.0);
  CHECK(rel_err(MatrixXd(s4.A.rightCols(3)), MatrixXd(1e-4 * p.A.rightCols(3))) <= 1e-15);
  CHECK(s4.A.leftCols(3) == p.A.leftCols(3));
  CHECK(rel_err(MatrixXd(s4.B.topRows(3)), MatrixXd(1e4 * p.B.topRows(3))) <= 1e-15);
  CHECK(s4.b == p.b);
  CHECK(s4.d == p.d);
  const auto back = scale_problem(s4, -4.0);
  CHECK(rel_err(back.A, p.A) <= 1e-15);
  CHECK(rel_err(back.B, p.B) <= 1e-15);
  CHECK_THROWS_AS(scale_problem(test::small_problem(1).problem, 1.0), InvalidArgument);
  CHECK_THROWS_AS(scale_problem(p, 1.0, {6}, {}), InvalidArgument);
}

TEST_CASE("componentwise perturbations") {
  const auto p = test::small_problem(4).problem;
  const auto zero = perturb(p, PerturbationSpec{0.0, 1});
  CHECK(zero.perturbed.A == p.A);
  CHECK(zero.delta_rF == 0);
  const auto e = perturb(p, PerturbationSpec{1e-6, 1});
  CHECK(e.delta_rmax <= 1e-6);
  CHECK(e.delta_rmax > 0);
  CHECK(e.delta_rF <= 1e-6);
  CHECK((e.dA.cwiseAbs().array() <= 1e-6 * p.A.cwiseAbs().array()).all());
  CHECK(rel_err(VectorXd(e.perturbed.b - p.b), e.db) <= 1e-8);
  CHECK(perturb(p, PerturbationSpec{1e-6, 1}).dA == e.dA);
  CHECK_THROWS_AS(perturb(p, PerturbationSpec{-1, 1}), InvalidArgument);
}
