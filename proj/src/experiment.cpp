#include "eilscond/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eilscond/condnum.hpp"
#include "eilscond/problem.hpp"

namespace eilscond::experiment {

namespace {

using report::fixed4;
using report::num;

double cap_of(const Config& cfg) { return cfg.memory_cap > 0 ? cfg.memory_cap : default_memory_cap(); }

GenSpec spec_for(const Config& cfg, const Size& sz, int trial) {
  GenSpec g = cfg.gen;
  if (sz.m != g.m()) {
    g.p = Index(std::llround(2.0 * double(sz.m) / 3.0));
    g.q = sz.m - g.p;
  }
  g.n = sz.n;
  g.s = sz.s;
  g.seed = cfg.gen.seed + std::uint64_t(trial);
  return g;
}

std::vector<Size> sizes_of(const Config& cfg) {
  if (!cfg.sizes.empty()) return cfg.sizes;
  return {Size{cfg.gen.m(), cfg.gen.n, cfg.gen.s}};
}

EilsProblem<double> generated(const GenSpec& g) {
  EilsProblem<double> prob = gen_problem(g).problem;
  if (g.tau != 0) prob = scale_problem(prob, g.tau);
  return prob;
}

// Keeps the optimizer from discarding timed work.
volatile double g_sink = 0;

}  // namespace

Pattern parse_pattern(const std::string& name) {
  if (name == "errbound") return Pattern::ErrBound;
  if (name == "form-timing") return Pattern::FormTiming;
  if (name == "ubound-timing") return Pattern::UboundTiming;
  if (name == "ubound-ratio") return Pattern::UboundRatio;
  throw InvalidArgument("unknown experiment pattern '" + name + "'");
}

std::string pattern_name(Pattern p) {
  switch (p) {
    case Pattern::ErrBound: return "errbound";
    case Pattern::FormTiming: return "form-timing";
    case Pattern::UboundTiming: return "ubound-timing";
    case Pattern::UboundRatio: return "ubound-ratio";
  }
  return "?";
}

Summary summarize(std::vector<double> v) {
  Summary s;
  if (v.empty()) {
    s.max = s.median = s.min = s.mean = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  const std::size_t k = v.size();
  s.median = k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
  double acc = 0;
  for (double x : v) acc += x;
  s.mean = acc / double(k);
  return s;
}

std::vector<std::pair<std::string, MatrixXd>> errbound_projections(Index n, std::uint64_t seed) {
  std::vector<std::pair<std::string, MatrixXd>> out;
  out.emplace_back("I", MatrixXd::Identity(n, n));
  const Index k = std::min<Index>(3, n);
  MatrixXd first = MatrixXd::Zero(n, k);
  first.topRows(k).setIdentity();
  out.emplace_back("first3", first);
  Rng rng(seed, 0xC0);
  MatrixXd conv = rng.uniform_matrix(n, 1, 0.0, 1.0);
  conv /= conv.sum();
  out.emplace_back("convex", conv);
  return out;
}

std::vector<ErrBoundRow> run_errbound(const Config& cfg) {
  std::vector<ErrBoundRow> rows;
  const Size sz{cfg.gen.m(), cfg.gen.n, cfg.gen.s};
  for (int t = 0; t < cfg.reps; ++t) {
    const GenSpec g = spec_for(cfg, sz, t);
    const EilsProblem<double> prob = generated(g);
    const auto [sol, f] = solve_closed_form(prob);
    const EilsSolution<double> x_sol = solve_augmented(prob);
    const Perturbation pert = perturb(prob, PerturbationSpec{cfg.epsilon, g.seed ^ 0x5EEDull});
    const EilsSolution<double> xh = solve_augmented(pert.perturbed);
    const VectorXd dx = xh.x - x_sol.x;

    for (const auto& [name, L] : errbound_projections(prob.n(), g.seed)) {
      ErrBoundRow row;
      row.trial = t;
      row.seed = g.seed;
      row.L = name;
      row.tau = g.tau;
      row.delta_rF = pert.delta_rF;
      row.delta_rmax = pert.delta_rmax;
      const VectorXd Ltx = L.transpose() * x_sol.x;
      const VectorXd Ltdx = L.transpose() * dx;
      row.r2 = Ltdx.norm() / Ltx.norm();
      row.rm = vecinf(Ltdx) / vecinf(Ltx);
      row.rc = vecinf(VectorXd(entrywise_div(Ltdx, VectorXd(Ltx))));
      const auto params = make_params(CondPreset::NormwiseRelative2, prob, sol, L);
      row.kappa2 = kappa2_form1(prob, sol, f, params);
      const auto mc = mixed_comp_exact(prob, sol, f, L);
      row.kappam = mc.mixed;
      row.kappac = mc.comp;
      row.kappa2_bd = row.kappa2 * pert.delta_rF;
      row.kappam_bd = row.kappam * pert.delta_rmax;
      row.kappac_bd = row.kappac * pert.delta_rmax;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<FormTimingRow> run_form_timing(const Config& cfg) {
  std::vector<FormTimingRow> rows;
  const double cap = cap_of(cfg);
  for (const Size& sz : sizes_of(cfg)) {
    for (int t = 0; t < cfg.reps; ++t) {
      const EilsProblem<double> prob = generated(spec_for(cfg, sz, t));
      const auto [sol, f] = solve_closed_form(prob);
      const MatrixXd L = MatrixXd::Identity(prob.n(), prob.n());
      const auto params = make_params(CondPreset::AbsoluteUnit, prob, sol, L);
      const double entries = double(L.cols()) * double(prob.n() + 1) * double(prob.m() + prob.s());

      FormTimingRow kron{t, sz, "kron", false, 0, 0, entries};
      if (entries > cap) {
        kron.skipped = true;
        kron.median_seconds = std::numeric_limits<double>::quiet_NaN();
        kron.value = std::numeric_limits<double>::quiet_NaN();
      } else {
        kron.median_seconds = time_median([&] { g_sink = kron.value = kappa2_kron(prob, sol, f, params, cap); },
                                          cfg.inner_reps);
      }
      FormTimingRow c1{t, sz, "c1", false, 0, 0, entries};
      c1.median_seconds =
          time_median([&] { g_sink = c1.value = kappa2_form1(prob, sol, f, params); }, cfg.inner_reps);
      FormTimingRow c2{t, sz, "c2", false, 0, 0, entries};
      c2.median_seconds =
          time_median([&] { g_sink = c2.value = kappa2_form2(prob, sol, f, params); }, cfg.inner_reps);
      rows.push_back(kron);
      rows.push_back(c1);
      rows.push_back(c2);
    }
  }
  return rows;
}

std::vector<UboundTimingRow> run_ubound_timing(const Config& cfg) {
  std::vector<UboundTimingRow> rows;
  for (const Size& sz : sizes_of(cfg)) {
    for (int t = 0; t < cfg.reps; ++t) {
      const EilsProblem<double> prob = generated(spec_for(cfg, sz, t));
      const auto [sol, f] = solve_closed_form(prob);
      const MatrixXd L = MatrixXd::Identity(prob.n(), prob.n());
      UboundTimingRow row;
      row.trial = t;
      row.size = sz;
      row.exact_seconds = time_median([&] { g_sink = row.kappam = kappa_mixed(prob, sol, f, L); }, cfg.inner_reps);
      row.bound_seconds =
          time_median([&] { g_sink = row.kappam_U = upper_bound_mixed(prob, sol, f, L); }, cfg.inner_reps);
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<UboundRatioRow> run_ubound_ratio(const Config& cfg) {
  std::vector<UboundRatioRow> rows;
  for (int t = 0; t < cfg.reps; ++t) {
    GenSpec g = cfg.gen;
    g.seed = cfg.gen.seed + std::uint64_t(t);
    const EilsProblem<double> prob = generated(g);
    const auto [sol, f] = solve_closed_form(prob);
    const MatrixXd L = MatrixXd::Identity(prob.n(), prob.n());
    const auto exact = mixed_comp_exact(prob, sol, f, L);
    const auto ub = upper_bounds(prob, sol, f, L);
    UboundRatioRow row;
    row.trial = t;
    row.seed = g.seed;
    row.kappam = exact.mixed;
    row.kappac = exact.comp;
    row.kappam_U = ub.mixed;
    row.kappac_U = ub.comp;
    row.rm = ub.mixed / exact.mixed;
    row.rc = ub.comp / exact.comp;
    rows.push_back(row);
  }
  return rows;
}

report::Table errbound_table(const std::vector<ErrBoundRow>& rows) {
  report::Table tab;
  tab.columns = {"trial", "seed", "L", "tau",
                 "r2", "kappa2_normwise_c1", "kappa2_bd",
                 "rinf_m", "kappa_mixed_exact", "kappa_mixed_bd",
                 "rinf_c", "kappa_comp_exact", "kappa_comp_bd",
                 "delta_rF", "delta_rmax"};
  for (const auto& r : rows)
    tab.add_row({std::to_string(r.trial), std::to_string(r.seed), r.L, num(r.tau), num(r.r2), num(r.kappa2),
                 num(r.kappa2_bd), num(r.rm), num(r.kappam), num(r.kappam_bd), num(r.rc), num(r.kappac),
                 num(r.kappac_bd), num(r.delta_rF), num(r.delta_rmax)});
  return tab;
}

report::Table errbound_summary(const std::vector<ErrBoundRow>& rows) {
  report::Table tab;
  tab.columns = {"L", "tau", "stat", "r2", "kappa2_bd", "rinf_m", "kappa_mixed_bd", "rinf_c", "kappa_comp_bd"};
  std::vector<std::pair<std::string, double>> keys;
  for (const auto& r : rows) {
    const auto k = std::make_pair(r.L, r.tau);
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  for (const auto& [L, tau] : keys) {
    std::vector<double> cols[6];
    for (const auto& r : rows) {
      if (r.L != L || r.tau != tau) continue;
      const double v[6] = {r.r2, r.kappa2_bd, r.rm, r.kappam_bd, r.rc, r.kappac_bd};
      for (int i = 0; i < 6; ++i) cols[i].push_back(v[i]);
    }
    Summary s[6];
    for (int i = 0; i < 6; ++i) s[i] = summarize(cols[i]);
    const char* names[] = {"max", "median", "min", "mean"};
    for (int st = 0; st < 4; ++st) {
      std::vector<std::string> row = {L, num(tau), names[st]};
      for (int i = 0; i < 6; ++i) {
        const double vals[4] = {s[i].max, s[i].median, s[i].min, s[i].mean};
        row.push_back(num(vals[st]));
      }
      tab.add_row(row);
    }
  }
  return tab;
}

report::Table form_timing_table(const std::vector<FormTimingRow>& rows) {
  report::Table tab;
  tab.columns = {"trial", "m", "n", "s", "form", "status", "median_seconds", "kappa2", "kron_entries"};
  for (const auto& r : rows)
    tab.add_row({std::to_string(r.trial), std::to_string(r.size.m), std::to_string(r.size.n),
                 std::to_string(r.size.s), r.form, r.skipped ? "skipped-memory-guard" : "ok",
                 r.skipped ? "*" : num(r.median_seconds), r.skipped ? "*" : num(r.value),
                 num(r.projected_entries)});
  return tab;
}

report::Table form_timing_summary(const std::vector<FormTimingRow>& rows) {
  report::Table tab;
  tab.columns = {"m", "n", "s", "form", "mean_seconds", "median_seconds", "max_seconds", "min_seconds"};
  std::vector<std::pair<std::array<Index, 3>, std::string>> keys;
  for (const auto& r : rows) {
    const auto k = std::make_pair(std::array<Index, 3>{r.size.m, r.size.n, r.size.s}, r.form);
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  for (const auto& [sz, form] : keys) {
    std::vector<double> t;
    bool skipped = false;
    for (const auto& r : rows) {
      if (r.size.m != sz[0] || r.size.n != sz[1] || r.size.s != sz[2] || r.form != form) continue;
      skipped = skipped || r.skipped;
      if (!r.skipped) t.push_back(r.median_seconds);
    }
    const Summary s = summarize(t);
    std::vector<std::string> row = {std::to_string(sz[0]), std::to_string(sz[1]), std::to_string(sz[2]), form};
    if (skipped) {
      for (int i = 0; i < 4; ++i) row.push_back("*");
    } else {
      for (double v : {s.mean, s.median, s.max, s.min}) row.push_back(num(v));
    }
    tab.add_row(row);
  }
  return tab;
}

report::Table ubound_timing_table(const std::vector<UboundTimingRow>& rows) {
  report::Table tab;
  tab.columns = {"trial", "m", "n", "s", "exact_mixed_seconds", "upper_bound_seconds", "kappa_mixed_exact",
                 "kappa_mixed_upper"};
  for (const auto& r : rows)
    tab.add_row({std::to_string(r.trial), std::to_string(r.size.m), std::to_string(r.size.n),
                 std::to_string(r.size.s), num(r.exact_seconds), num(r.bound_seconds), num(r.kappam),
                 num(r.kappam_U)});
  return tab;
}

report::Table ubound_timing_summary(const std::vector<UboundTimingRow>& rows) {
  report::Table tab;
  tab.columns = {"m", "n", "s", "mean_exact_seconds", "mean_upper_bound_seconds"};
  std::vector<std::array<Index, 3>> keys;
  for (const auto& r : rows) {
    const std::array<Index, 3> k{r.size.m, r.size.n, r.size.s};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  for (const auto& k : keys) {
    std::vector<double> e, b;
    for (const auto& r : rows) {
      if (r.size.m != k[0] || r.size.n != k[1] || r.size.s != k[2]) continue;
      e.push_back(r.exact_seconds);
      b.push_back(r.bound_seconds);
    }
    tab.add_row({std::to_string(k[0]), std::to_string(k[1]), std::to_string(k[2]), num(summarize(e).mean),
                 num(summarize(b).mean)});
  }
  return tab;
}

report::Table ubound_ratio_table(const std::vector<UboundRatioRow>& rows) {
  report::Table tab;
  tab.columns = {"trial", "seed", "kappa_mixed_exact", "kappa_mixed_upper", "r_m",
                 "kappa_comp_exact", "kappa_comp_upper", "r_c"};
  for (const auto& r : rows)
    tab.add_row({std::to_string(r.trial), std::to_string(r.seed), num(r.kappam), num(r.kappam_U), num(r.rm),
                 num(r.kappac), num(r.kappac_U), num(r.rc)});
  return tab;
}

report::Table ubound_ratio_summary(const std::vector<UboundRatioRow>& rows) {
  std::vector<double> rm, rc;
  for (const auto& r : rows) {
    rm.push_back(r.rm);
    rc.push_back(r.rc);
  }
  const Summary a = summarize(rm), b = summarize(rc);
  report::Table tab;
  tab.columns = {"ratio", "max", "median", "min"};
  tab.add_row({"r_m", fixed4(a.max), fixed4(a.median), fixed4(a.min)});
  tab.add_row({"r_c", fixed4(b.max), fixed4(b.median), fixed4(b.min)});
  return tab;
}

}  // namespace eilscond::experiment
