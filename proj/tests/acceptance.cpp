// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "eilscond/eilscond.hpp"
#include "eilscond/experiment.hpp"
#include "test_util.hpp"

using namespace eilscond;
using eilscond::test::randn;
using eilscond::test::rel_err;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GenSpec spec(Index p, Index q, Index n, Index s, double kappaA, double kappaB, double omega, std::uint64_t seed) {
  GenSpec g;
  g.p = p;
  g.q = q;
  g.n = n;
  g.s = s;
  g.kappaA_target = kappaA;
  g.kappaB = kappaB;
  g.omega = omega;
  g.seed = seed;
  return g;
}

// A random shape with m <= mmax, n <= nmax, s <= smax.
GenSpec random_shape(std::mt19937_64& gen, Index mmax, Index nmax, Index smax, std::uint64_t seed) {
  auto pick = [&](Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(gen); };
  const Index n = pick(3, nmax);
  const Index s = pick(1, std::min(smax, n));
  const Index m = pick(n, mmax);
  const Index p = pick(std::max<Index>(n - s, 1), m);
  return spec(p, m - p, n, s, 2.0, 10.0, 1e-2, seed);
}

// 1 ---------------------------------------------------------------------------
Outcome three_forms() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(101);
  double worst = 0, worst_cond = 0;
  for (int t = 0; t < 100; ++t) {
    GenSpec g = random_shape(gen, 60, 30, 10, 1000 + t);
    g.hyperbolic_cap = std::log(10.0) / 4;  // keeps kappa(A) <= 2 * sqrt(10)
    const auto prob = gen_problem(g).problem;
    worst_cond = std::max(worst_cond, cond2(prob.A));
    const auto [sol, f] = solve_closed_form(prob);
    const MatrixXd L = MatrixXd::Identity(prob.n(), prob.n());
    const auto params = make_params(CondPreset::NormwiseRelative2, prob, sol, L);
    const double k0 = kappa2_kron(prob, sol, f, params);
    worst = std::max({worst, rel_err(kappa2_form1(prob, sol, f, params), k0),
                      rel_err(kappa2_form2(prob, sol, f, params), k0)});
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-8 && worst_cond <= 10 && secs < 30,
          "max rel diff " + fmt("%.2e", worst) + ", max kappa(A) " + fmt("%.2f", worst_cond) + ", " +
              fmt("%.1f", secs) + " s"};
}

// 2 ---------------------------------------------------------------------------
Outcome derivative() {
  std::mt19937_64 gen(202);
  double worst_col = 0;
  for (int t = 0; t < 10; ++t) {
    const auto prob = gen_problem(random_shape(gen, 20, 10, 4, 2000 + t)).problem;
    const auto [sol, f] = solve_closed_form(prob);
    const Index m = prob.m(), n = prob.n(), s = prob.s();
    const MatrixXd mf = build_MF(prob, sol, f, MatrixXd(MatrixXd::Identity(n, n)));
    MatrixXd dA = MatrixXd::Zero(m, n), dB = MatrixXd::Zero(s, n);
    VectorXd db = VectorXd::Zero(m), dd = VectorXd::Zero(s);
    auto check = [&](Index col) {
      const VectorXd v = frechet_apply(prob, sol, f, dA, dB, db, dd);
      worst_col = std::max(worst_col, rel_err(VectorXd(mf.col(col)), v));
    };
    Index col = 0;
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < m; ++i, ++col) {
        dA(i, j) = 1;
        check(col);
        dA(i, j) = 0;
      }
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < s; ++i, ++col) {
        dB(i, j) = 1;
        check(col);
        dB(i, j) = 0;
      }
    for (Index i = 0; i < m; ++i, ++col) {
      db(i) = 1;
      check(col);
      db(i) = 0;
    }
    for (Index i = 0; i < s; ++i, ++col) {
      dd(i) = 1;
      check(col);
      dd(i) = 0;
    }
  }

  int fd_pass = 0;
  double worst_fd = 0;
  for (int t = 0; t < 100; ++t) {
    const auto prob = gen_problem(random_shape(gen, 30, 15, 6, 3000 + t)).problem;
    const auto [sol, f] = solve_closed_form(prob);
    const Index m = prob.m(), n = prob.n(), s = prob.s();
    const MatrixXd dA = randn(m, n, gen), dB = randn(s, n, gen);
    const VectorXd db = randn(m, 1, gen), dd = randn(s, 1, gen);
    const double dn = std::sqrt(dA.squaredNorm() + dB.squaredNorm() + db.squaredNorm() + dd.squaredNorm());
    const double h = 1e-6 * prob.data_norm() / dn;
    auto shifted = [&](double sign) {
      EilsProblem<double> q = prob;
      q.A += sign * h * dA;
      q.B += sign * h * dB;
      q.b += sign * h * db;
      q.d += sign * h * dd;
      return solve_augmented(q).x;
    };
    const VectorXd fd = (shifted(1) - shifted(-1)) / (2 * h);
    const double e = rel_err(frechet_apply(prob, sol, f, dA, dB, db, dd), fd);
    worst_fd = std::max(worst_fd, e);
    fd_pass += e <= 1e-6;
  }
  return {worst_col <= 1e-12 && fd_pass >= 99, "max column rel diff " + fmt("%.2e", worst_col) + ", FD passes " +
                                                   std::to_string(fd_pass) + "/100 (max " +
                                                   fmt("%.2e", worst_fd) + ")"};
}

// 3 ---------------------------------------------------------------------------
struct SupResult {
  double max_ratio = 0;  // max sampled norm / kappa2
  Index dim = 0;
};

SupResult sample_sup(const EilsProblem<double>& prob, std::uint64_t seed, int samples) {
  const auto [sol, f] = solve_closed_form(prob);
  const Index m = prob.m(), n = prob.n(), s = prob.s();
  const auto params = make_params(CondPreset::NormwiseRelative2, prob, sol, MatrixXd(MatrixXd::Identity(n, n)));
  const double k2 = kappa2_form1(prob, sol, f, params);
  // scalar weights w and xi: kappa2 = sup xi |dx| / (w |(dA,dB,db,dd)|_F)
  const double w = params.Phi.scalar(), xi = params.xi.scalar();
  std::mt19937_64 gen(seed);
  SupResult out;
  out.dim = (n + 1) * (m + s);
  for (int t = 0; t < samples; ++t) {
    const MatrixXd dA = randn(m, n, gen), dB = randn(s, n, gen);
    const VectorXd db = randn(m, 1, gen), dd = randn(s, 1, gen);
    const double dn = std::sqrt(dA.squaredNorm() + dB.squaredNorm() + db.squaredNorm() + dd.squaredNorm()) * w;
    const double v = xi * frechet_apply(prob, sol, f, dA, dB, db, dd).norm() / dn;
    out.max_ratio = std::max(out.max_ratio, v / k2);
  }
  return out;
}

Outcome sup_characterization() {
  double worst_excess = 0;
  int panels = 0;
  // never exceeds: shapes up to (n+1)(m+s) = 60
  const std::vector<std::array<Index, 4>> wide = {{2, 1, 2, 1}, {3, 1, 3, 1}, {4, 2, 3, 2}, {6, 2, 4, 3},
                                                  {5, 3, 5, 2}, {3, 2, 2, 1}, {1, 1, 1, 1}, {2, 1, 1, 1}};
  for (std::size_t i = 0; i < wide.size(); ++i) {
    const auto [p, q, n, s] = wide[i];
    const auto prob = gen_problem(spec(p, q, n, s, 10, 2, 0.5, 400 + i)).problem;
    if ((n + 1) * (p + q + s) > 60) continue;
    ++panels;
    worst_excess = std::max(worst_excess, sample_sup(prob, 40 + i, 10000).max_ratio);
  }
  // reach: the tiny shapes where 10^4 uniform directions come within 10% of the top one
  double worst_reach = 1e300;
  for (int i = 0; i < 10; ++i) {
    const bool six = i % 2 == 0;
    const auto prob = gen_problem(spec(six ? 1 : 2, 1, 1, 1, 10, 2, 0.5, 500 + i)).problem;
    worst_reach = std::min(worst_reach, sample_sup(prob, 60 + i, 10000).max_ratio);
  }
  return {worst_excess <= 1 + 1e-10 && worst_reach >= 0.9,
          "max sampled/kappa2 " + fmt("%.6f", worst_excess) + " over " + std::to_string(panels) +
              " shapes; min reach " + fmt("%.4f", worst_reach) + " on (n+1)(m+s) <= 8"};
}

// 4 ---------------------------------------------------------------------------
Outcome bound_tightness() {
  const auto t0 = std::chrono::steady_clock::now();
  experiment::Config cfg;
  cfg.gen = spec(300, 120, 210, 140, 10, 10, 1e-4, 1);
  cfg.reps = 20;
  const auto low = experiment::run_ubound_ratio(cfg);
  cfg.gen.kappaA_target = 1e6;
  const auto high = experiment::run_ubound_ratio(cfg);
  bool dominated = true;
  double low_dev = 0, high_max = 0;
  for (const auto& r : low) {
    dominated = dominated && r.rm >= 1 - 1e-12 && r.rc >= 1 - 1e-12;
    low_dev = std::max(low_dev, std::abs(r.rm - 1));
  }
  for (const auto& r : high) {
    dominated = dominated && r.rm >= 1 - 1e-12 && r.rc >= 1 - 1e-12;
    high_max = std::max(high_max, r.rm);
  }
  const double secs = seconds_since(t0);
  return {dominated && low_dev <= 1e-4 && high_max <= 1.5 && secs < 300,
          std::string(dominated ? "bounds dominate" : "bound below exact") + ", kappaA~10 max |r_m-1| " +
              fmt("%.2e", low_dev) + ", kappaA~1e6 max r_m " + fmt("%.4f", high_max) + ", " + fmt("%.1f", secs) +
              " s"};
}

// 5, 6 -------------------------------------------------------------------------
struct ErrBoundRuns {
  std::vector<experiment::ErrBoundRow> tau0, tau4;
};

ErrBoundRuns errbound_runs() {
  experiment::Config cfg;
  cfg.gen = spec(20, 10, 20, 5, 10, 10, 1e-9, 7);
  cfg.reps = 100;
  cfg.epsilon = 1e-9;
  ErrBoundRuns out;
  out.tau0 = experiment::run_errbound(cfg);
  cfg.gen.tau = 4;
  out.tau4 = experiment::run_errbound(cfg);
  return out;
}

Outcome error_bounds(const ErrBoundRuns& runs) {
  bool ok = true;
  std::string detail;
  for (const auto* rows : {&runs.tau0, &runs.tau4}) {
    for (const char* L : {"I", "first3", "convex"}) {
      int n2 = 0, nm = 0, nc = 0, total = 0;
      double tau = 0;
      for (const auto& r : *rows) {
        if (r.L != L) continue;
        ++total;
        tau = r.tau;
        n2 += r.r2 <= 2 * r.kappa2_bd;
        nm += r.rm <= 2 * r.kappam_bd;
        nc += r.rc <= 2 * r.kappac_bd;
      }
      ok = ok && total == 100 && n2 >= 95 && nm >= 95 && nc >= 95;
      detail += std::string(detail.empty() ? "" : "; ") + L + "/tau" + fmt("%g", tau) + " " + std::to_string(n2) +
                "," + std::to_string(nm) + "," + std::to_string(nc);
    }
  }
  return {ok, detail};
}

Outcome scaling_sensitivity(const ErrBoundRuns& runs) {
  auto medians = [](const std::vector<experiment::ErrBoundRow>& rows) {
    std::vector<double> norm, comp;
    for (const auto& r : rows) {
      if (r.L != "I" || r.trial >= 20) continue;
      norm.push_back(r.kappa2_bd / r.r2);
      comp.push_back(r.kappac_bd / r.rc);
    }
    return std::make_pair(experiment::summarize(norm).median, experiment::summarize(comp).median);
  };
  const auto [n0, c0] = medians(runs.tau0);
  const auto [n4, c4] = medians(runs.tau4);
  const double norm_growth = n4 / n0;
  const double comp_change = std::max(c4 / c0, c0 / c4);
  return {norm_growth >= 10 && comp_change < 10,
          "normwise overestimation x" + fmt("%.3g", norm_growth) + " (" + fmt("%.3g", n0) + " -> " +
              fmt("%.3g", n4) + "), componentwise change x" + fmt("%.3g", comp_change)};
}

// 7 ---------------------------------------------------------------------------
Outcome specializations() {
  std::mt19937_64 gen(707);
  double els_k = 0, wls_k = 0, els_x = 0;
  for (int t = 0; t < 50; ++t) {
    GenSpec g = random_shape(gen, 30, 12, 5, 7000 + t);
    g.p = g.m();
    g.q = 0;
    const auto e = gen_problem(g).problem;
    const ElsProblem<double> p{e.A, e.B, e.b, e.d};
    const auto [sol, f] = solve_closed_form(e);
    const Index n = e.n();
    for (const MatrixXd& L : {MatrixXd(MatrixXd::Identity(n, n)), MatrixXd(randn(n, 2, gen))}) {
      const auto c = make_params(CondPreset::NormwiseRelative2, e, sol, L);
      const double k0 = kappa2_kron(e, sol, f, c);
      els_k = std::max({els_k, rel_err(els_kappa2_form1(p, sol, f, c), k0), rel_err(els_kappa2_form2(p, sol, f, c), k0),
                        rel_err(els_kappa2_kron(p, sol, f, c), k0)});
    }
    els_x = std::max(els_x, rel_err(els_pinv_solution(p), sol.x));

    const Index m = 6 + t % 20, nn = 2 + t % 5;
    const MatrixXd A = randn(m, nn, gen);
    const VectorXd b = randn(m, 1, gen);
    const WlsProblem<double> w{A, b, MatrixXd::Identity(m, m)};
    const IlsProblem<double> i{A, b, SignatureMatrix{m, 0}};
    const auto wf = wls_factorize(w);
    const auto ws = wls_solve(w, wf);
    const auto iff = ils_factorize(i);
    const auto is = ils_solve(i, iff);
    LsParams<double> lp;
    lp.L = MatrixXd::Identity(nn, nn);
    lp.Phi = lp.beta = 1 / std::sqrt(A.squaredNorm() + b.squaredNorm());
    lp.xi = 1 / ws.x.norm();
    wls_k = std::max({wls_k, rel_err(wls_kappa2_kron(w, ws, wf, lp), ils_kappa2_kron(i, is, iff, lp)),
                      rel_err(wls_kappa2_form1(w, ws, wf, lp), ils_kappa2_form1(i, is, iff, lp)),
                      rel_err(wls_kappa2_form2(w, ws, wf, lp), ils_kappa2_form2(i, is, iff, lp))});
  }
  return {els_k <= 1e-10 && wls_k <= 1e-10 && els_x <= 1e-10,
          "ELS vs J=I " + fmt("%.2e", els_k) + ", WLS(W=I) vs ILS(J=I) " + fmt("%.2e", wls_k) +
              ", ELS pseudoinverse solution " + fmt("%.2e", els_x)};
}

// 8 ---------------------------------------------------------------------------
Outcome form_timing() {
  experiment::Config cfg;
  cfg.gen = spec(160, 80, 120, 80, 10, 10, 1e-2, 11);
  cfg.sizes = {{240, 120, 80}};
  cfg.reps = 3;
  cfg.inner_reps = 5;
  const auto mid = experiment::run_form_timing(cfg);
  std::vector<double> tk, t1, t2;
  for (const auto& r : mid) {
    if (r.form == "kron") tk.push_back(r.median_seconds);
    if (r.form == "c1") t1.push_back(r.median_seconds);
    if (r.form == "c2") t2.push_back(r.median_seconds);
  }
  const double mk = experiment::summarize(tk).median, m1 = experiment::summarize(t1).median,
               m2 = experiment::summarize(t2).median;

  cfg.sizes = {{960, 480, 320}};
  cfg.reps = 1;
  cfg.inner_reps = 1;
  const auto big = experiment::run_form_timing(cfg);
  bool guarded = false;
  double b1 = 0, b2 = 0;
  for (const auto& r : big) {
    if (r.form == "kron") guarded = r.skipped;
    if (r.form == "c1") b1 = r.median_seconds;
    if (r.form == "c2") b2 = r.median_seconds;
  }
  return {mk >= 5 * m1 && m1 < m2 && guarded && b1 < 5 && b2 < 5,
          "(240,120,80) kron " + fmt("%.4f", mk) + " s, c1 " + fmt("%.4f", m1) + " s, c2 " + fmt("%.4f", m2) +
              " s; (960,480,320) kron " + (guarded ? "refused by guard" : "ran") + ", c1 " + fmt("%.3f", b1) +
              " s, c2 " + fmt("%.3f", b2) + " s"};
}

// 9 ---------------------------------------------------------------------------
Outcome identities() {
  std::mt19937_64 gen(909);
  double worst = 0;
  auto perm = [](Index a, Index b) { return MatrixXd(vec_perm(a, b).toDenseMatrix().cast<double>()); };
  for (int t = 0; t < 50; ++t) {
    auto pick = [&] { return std::uniform_int_distribution<Index>(1, 5)(gen); };
    const Index m = pick(), n = pick(), p = pick(), q = pick();
    const MatrixXd A = randn(m, n, gen), X = randn(n, p, gen), B = randn(p, q, gen);
    worst = std::max(worst, rel_err(vec(MatrixXd(A * X * B)), VectorXd(kron(B.transpose(), A) * vec(X))));
    const MatrixXd C = randn(p, q, gen);
    worst = std::max(worst, rel_err(MatrixXd(perm(p, m) * kron(A, C) * perm(n, q)), kron(C, A)));
    const VectorXd x = randn(n, 1, gen);
    worst = std::max(worst, rel_err(MatrixXd(kron(MatrixXd(x.transpose()), C) * perm(n, q)),
                                    kron(C, MatrixXd(x.transpose()))));
  }
  bool exact = ddag(0.0) == 1.0 && ddag(4.0) == 0.25 && ddag(-2.0) == -0.5;
  MatrixXd a = randn(4, 4, gen);
  a(0, 0) = 0;
  a(2, 3) = 0;
  const MatrixXd twice = ddag(MatrixXd(ddag(a)));
  for (Index j = 0; j < 4; ++j)
    for (Index i = 0; i < 4; ++i) exact = exact && twice(i, j) == (a(i, j) == 0 ? 1.0 : 1.0 / (1.0 / a(i, j)));
  return {worst <= 1e-13 && exact, "max identity residual " + fmt("%.2e", worst) +
                                       (exact ? ", ddag conventions exact" : ", ddag conventions violated")};
}

// 10 --------------------------------------------------------------------------
Outcome generator() {
  std::mt19937_64 gen(1010);
  double h_res = 0, kb_err = 0, r_err = 0;
  int valid = 0, total = 0;
  for (int t = 0; t < 50; ++t) {
    GenSpec g = random_shape(gen, 60, 30, 10, 10000 + t);
    g.kappaA_target = std::pow(10.0, t % 7);
    g.kappaB = g.s == 1 ? 1.0 : std::pow(10.0, t % 4);  // a 1 x n B always has kappa 1
    g.omega = t % 5 == 0 ? 0.0 : std::pow(10.0, -(t % 9));
    const auto gp = gen_problem(g);
    const MatrixXd Jd = gp.problem.J.dense<double>();
    h_res = std::max(h_res, max_norm(MatrixXd(gp.H.transpose() * Jd * gp.H - Jd)) / gp.H.squaredNorm());
    kb_err = std::max(kb_err, rel_err(cond2(gp.problem.B), g.kappaB));
    r_err = std::max(r_err, g.omega == 0 ? gp.r_true.norm() : rel_err(gp.r_true.norm(), g.omega));
    ++total;
    valid += validate(gp.problem).passed;
  }
  return {h_res <= 1e-10 && kb_err <= 0.05 && r_err <= 1e-13 && valid == total,
          "H^T J H residual " + fmt("%.2e", h_res) + ", kappa(B) rel err " + fmt("%.2e", kb_err) +
              ", |r| rel err " + fmt("%.2e", r_err) + ", valid " + std::to_string(valid) + "/" +
              std::to_string(total)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("CRITERION %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  };
  report(1, three_forms);
  report(2, derivative);
  report(3, sup_characterization);
  report(4, bound_tightness);
  ErrBoundRuns runs;
  bool runs_ok = true;
  std::string runs_err;
  try {
    runs = errbound_runs();
  } catch (const std::exception& e) {
    runs_ok = false;
    runs_err = e.what();
  }
  report(5, [&]() -> Outcome { return runs_ok ? error_bounds(runs) : Outcome{false, "exception: " + runs_err}; });
  report(6, [&]() -> Outcome { return runs_ok ? scaling_sensitivity(runs) : Outcome{false, "exception: " + runs_err}; });
  report(7, specializations);
  report(8, form_timing);
  report(9, identities);
  report(10, generator);
  std::printf("%d of 10 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
