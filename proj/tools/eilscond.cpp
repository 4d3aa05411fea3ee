// eilscond: generate, solve and condition EILS problems; run the experiment patterns.
//
// Exit codes: 0 ok, 1 other error, 2 usage, 3 I/O, 4 assumption violated, 5 memory guard.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "eilscond/condnum.hpp"
#include "eilscond/experiment.hpp"
#include "eilscond/genrand.hpp"
#include "eilscond/io.hpp"
#include "eilscond/problem.hpp"
#include "eilscond/report.hpp"

namespace {

using namespace eilscond;
namespace fs = std::filesystem;

enum Exit { kOk = 0, kOther = 1, kUsage = 2, kIo = 3, kAssumption = 4, kMemory = 5 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void add_gen_flags(CLI::App* app, GenSpec& g) {
  app->add_option("--p", g.p, "rows of A with signature +1")->required();
  app->add_option("--q", g.q, "rows of A with signature -1")->required();
  app->add_option("--n", g.n, "columns of A and B")->required();
  app->add_option("--s", g.s, "rows of B")->required();
  app->add_option("--kappaA", g.kappaA_target, "condition target of the diagonal factor of A")->capture_default_str();
  app->add_option("--kappaB", g.kappaB, "condition number of B")->capture_default_str();
  app->add_option("--omega", g.omega, "2-norm of the residual")->capture_default_str();
  app->add_option("--tau", g.tau, "scale the last 3 columns of A by 10^-tau, first 3 rows of B by 10^tau")
      ->capture_default_str();
  app->add_option("--seed", g.seed, "base seed")->capture_default_str();
  app->add_option("--hyperbolic-cap", g.hyperbolic_cap, "largest hyperbolic angle in H")->capture_default_str();
}

/// identity | cols i..j (1-based, inclusive) | Matrix Market file (n x k, or 1 x n row)
MatrixXd parse_projection(const std::vector<std::string>& spec, Index n) {
  if (spec.empty() || (spec.size() == 1 && spec[0] == "identity")) return MatrixXd::Identity(n, n);
  if (spec[0] == "cols") {
    if (spec.size() != 2) throw UsageError("--L cols expects a range like 1..3");
    static const std::regex range(R"((\d+)\.\.(\d+))");
    std::smatch mt;
    if (!std::regex_match(spec[1], mt, range)) throw UsageError("--L cols expects i..j, got '" + spec[1] + "'");
    const Index i = std::stol(mt[1]), j = std::stol(mt[2]);
    if (i < 1 || j < i || j > n) throw UsageError("--L cols range must satisfy 1 <= i <= j <= n");
    MatrixXd L = MatrixXd::Zero(n, j - i + 1);
    for (Index c = i; c <= j; ++c) L(c - 1, c - i) = 1;
    return L;
  }
  if (spec.size() != 1) throw UsageError("--L expects identity, 'cols i..j' or a file path");
  MatrixXd L = io::read_matrix_market(spec[0]);
  if (L.rows() == 1 && L.cols() == n && n != 1) L.transposeInPlace();
  if (L.rows() != n) throw UsageError("--L file must have n rows (or be a 1 x n row)");
  return L;
}

int cmd_gen(const GenSpec& g, const std::string& out) {
  GeneratedProblem gp = gen_problem(g);
  io::Bundle bundle;
  bundle.problem = g.tau != 0 ? scale_problem(gp.problem, g.tau) : gp.problem;
  const double kA = cond2(bundle.problem.A), kB = cond2(bundle.problem.B);
  const double nr = gp.r_true.norm();
  bundle.meta = {{"generator", "eilscond-genrand-1"},
                 {"seed", std::to_string(g.seed)},
                 {"kappaA_target", fmt(g.kappaA_target)},
                 {"kappaB_target", fmt(g.kappaB)},
                 {"omega", fmt(g.omega)},
                 {"tau", fmt(g.tau)},
                 {"hyperbolic_cap", fmt(g.hyperbolic_cap)},
                 {"attempts", std::to_string(gp.attempts)},
                 {"kappaA_achieved", fmt(kA)},
                 {"kappaB_achieved", fmt(kB)},
                 {"residual_norm", fmt(nr)}};
  io::save_bundle(out, bundle);
  if (g.tau == 0) io::write_matrix_market(fs::path(out) / "x_true.mtx", MatrixXd(gp.x_true));
  const auto rep = validate(bundle.problem);
  if (!rep.passed) throw AssumptionViolated("scaled problem fails validation: " + rep.reason);
  std::cout << "wrote " << out << "\n"
            << "m=" << bundle.problem.m() << " n=" << bundle.problem.n() << " s=" << bundle.problem.s()
            << " p=" << g.p << " q=" << g.q << "\n"
            << "kappa(A)=" << fmt(kA) << "\nkappa(B)=" << fmt(kB) << "\n|r|_2=" << fmt(nr) << "\n";
  return kOk;
}

int cmd_solve(const std::string& dir, std::string out) {
  const io::Bundle b = io::load_bundle(dir);
  const EilsSolution<double> sol = solve_augmented(b.problem);
  if (out.empty()) out = dir;
  fs::create_directories(out);
  io::write_matrix_market(fs::path(out) / "x.mtx", MatrixXd(sol.x));
  io::write_matrix_market(fs::path(out) / "r.mtx", MatrixXd(sol.r));
  io::write_matrix_market(fs::path(out) / "lambda.mtx", MatrixXd(sol.lambda));
  const auto res = kkt_residuals(b.problem, sol);
  std::cout << "constraint |Bx-d|=" << fmt(res.constraint) << "\n"
            << "residual |r+Ax-b|=" << fmt(res.residual) << "\n"
            << "stationarity |B^T lambda + A^T J r|=" << fmt(res.stationarity) << "\n"
            << "scale=" << fmt(res.scale) << "\n"
            << "max_relative=" << fmt(res.max_relative()) << "\n";
  return kOk;
}

int cmd_cond(const std::string& dir, const std::string& preset_name, const std::string& form,
             const std::vector<std::string>& Lspec) {
  CondPreset preset;
  if (preset_name == "norm2") preset = CondPreset::NormwiseRelative2;
  else if (preset_name == "mixed") preset = CondPreset::MixedInf;
  else if (preset_name == "comp") preset = CondPreset::ComponentwiseInf;
  else if (preset_name == "unit") preset = CondPreset::AbsoluteUnit;
  else throw UsageError("unknown preset '" + preset_name + "'");
  const bool inf_preset = preset == CondPreset::MixedInf || preset == CondPreset::ComponentwiseInf;
  if ((form == "c1" || form == "c2") && inf_preset)
    throw UsageError("--form " + form + " needs scalar weights: use --preset norm2 or unit");
  if (form == "ubound" && !inf_preset) throw UsageError("--form ubound needs --preset mixed or comp");

  const io::Bundle b = io::load_bundle(dir);
  const EilsProblem<double>& prob = b.problem;
  const MatrixXd L = parse_projection(Lspec, prob.n());
  const auto t0 = std::chrono::steady_clock::now();
  const auto [sol, f] = solve_closed_form(prob);
  const CondParams<double> params = make_params(preset, prob, sol, L);
  double value = 0;
  std::string formula;
  if (form == "kron") {
    if (inf_preset) {
      value = kappa_inf_materialized(prob, sol, f, params);
      formula = "infinity norm of the explicit Kronecker-form derivative";
    } else {
      value = kappa2_kron(prob, sol, f, params);
      formula = "spectral norm of the explicit Kronecker-form derivative";
    }
  } else if (form == "c1") {
    value = kappa2_form1(prob, sol, f, params);
    formula = "compact Gram form sqrt(|xi^2 L^T (Y S Y^T + ...) L|_2)";
  } else if (form == "c2") {
    value = kappa2_form2(prob, sol, f, params);
    formula = "compact factored form |xi L^T [M^-1 P Q, ...]|_2";
  } else if (form == "exact-inf") {
    value = kappa_inf(prob, sol, f, params);
    formula = "streamed row sums of |L^T M_F| weighted by the data";
  } else if (form == "ubound") {
    const auto ub = upper_bounds(prob, sol, f, L);
    value = preset == CondPreset::MixedInf ? ub.mixed : ub.comp;
    formula = "Kronecker-free upper bound on the mixed/componentwise number";
  } else {
    throw UsageError("unknown form '" + form + "'");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << "kappa=" << fmt(value) << "\npreset=" << preset_name << "\nform=" << form << "\nformula=" << formula
            << "\nk=" << L.cols() << "\nelapsed_seconds=" << fmt(secs) << "\n";
  return kOk;
}

std::vector<experiment::Size> parse_sizes(const std::string& text) {
  std::vector<experiment::Size> out;
  std::stringstream ss(text);
  std::string item;
  static const std::regex triple(R"(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*)");
  while (std::getline(ss, item, ';')) {
    if (item.empty()) continue;
    std::smatch mt;
    if (!std::regex_match(item, mt, triple)) throw UsageError("--sizes expects m,n,s;m,n,s;...");
    out.push_back({std::stol(mt[1]), std::stol(mt[2]), std::stol(mt[3])});
  }
  return out;
}

int cmd_experiment(const std::string& pattern, experiment::Config cfg, const std::string& sizes,
                   const std::string& csv, bool aligned) {
  const experiment::Pattern pat = experiment::parse_pattern(pattern);
  if (cfg.reps < 1) throw UsageError("--reps must be >= 1");
  if (!sizes.empty()) cfg.sizes = parse_sizes(sizes);
  report::Table rows, summary;
  switch (pat) {
    case experiment::Pattern::ErrBound: {
      const auto r = experiment::run_errbound(cfg);
      rows = experiment::errbound_table(r);
      summary = experiment::errbound_summary(r);
      break;
    }
    case experiment::Pattern::FormTiming: {
      const auto r = experiment::run_form_timing(cfg);
      rows = experiment::form_timing_table(r);
      summary = experiment::form_timing_summary(r);
      for (const auto& row : r)
        if (row.skipped && row.trial == 0)
          std::cerr << "kron form skipped at (m,n,s)=(" << row.size.m << "," << row.size.n << "," << row.size.s
                    << "): needs " << fmt(row.projected_entries) << " entries (~"
                    << fmt(row.projected_entries * 8 / 1e9)
                    << " GB); the computation breaks down due to the lack of memory\n";
      break;
    }
    case experiment::Pattern::UboundTiming: {
      const auto r = experiment::run_ubound_timing(cfg);
      rows = experiment::ubound_timing_table(r);
      summary = experiment::ubound_timing_summary(r);
      break;
    }
    case experiment::Pattern::UboundRatio: {
      const auto r = experiment::run_ubound_ratio(cfg);
      rows = experiment::ubound_ratio_table(r);
      summary = experiment::ubound_ratio_summary(r);
      break;
    }
  }
  if (!csv.empty()) {
    std::ofstream out(csv);
    if (!out) throw IoError("cannot write '" + csv + "'");
    rows.write_csv(out);
  }
  if (aligned) {
    summary.write_aligned(std::cout);
  } else {
    summary.write_csv(std::cout);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Condition numbers of equality-constrained indefinite least squares problems"};
  app.require_subcommand(1);

  GenSpec gen_spec;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "generate a random problem bundle");
  add_gen_flags(gen, gen_spec);
  gen->add_option("--out", gen_out, "output directory")->required();

  std::string solve_dir, solve_out;
  auto* solve = app.add_subcommand("solve", "solve a bundle and report KKT residuals");
  solve->add_option("bundle", solve_dir, "bundle directory")->required();
  solve->add_option("--out", solve_out, "where to write x.mtx, r.mtx, lambda.mtx (default: bundle)");

  std::string cond_dir, preset = "norm2", form = "c1";
  std::vector<std::string> Lspec;
  auto* cond = app.add_subcommand("cond", "projected condition number of a bundle");
  cond->add_option("bundle", cond_dir, "bundle directory")->required();
  cond->add_option("--preset", preset, "norm2 | mixed | comp | unit")
      ->check(CLI::IsMember({"norm2", "mixed", "comp", "unit"}))
      ->capture_default_str();
  cond->add_option("--form", form, "kron | c1 | c2 | exact-inf | ubound")
      ->check(CLI::IsMember({"kron", "c1", "c2", "exact-inf", "ubound"}))
      ->capture_default_str();
  cond->add_option("--L", Lspec, "identity | cols i..j | matrix file")->expected(1, 2);

  experiment::Config cfg;
  std::string pattern, sizes, csv;
  bool aligned = false;
  auto* exp = app.add_subcommand("experiment", "run an experiment pattern");
  exp->add_option("--pattern", pattern, "errbound | form-timing | ubound-timing | ubound-ratio")
      ->required()
      ->check(CLI::IsMember({"errbound", "form-timing", "ubound-timing", "ubound-ratio"}));
  add_gen_flags(exp, cfg.gen);
  exp->add_option("--reps", cfg.reps, "replications")->capture_default_str();
  exp->add_option("--epsilon", cfg.epsilon, "perturbation magnitude (errbound)")->capture_default_str();
  exp->add_option("--sizes", sizes, "timing grid m,n,s;m,n,s;... (default: the generator sizes)");
  exp->add_option("--inner-reps", cfg.inner_reps, "timed repetitions per cell")->capture_default_str();
  exp->add_option("--csv", csv, "write per-trial rows as CSV");
  exp->add_flag("--aligned", aligned, "print the summary as an aligned table instead of CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_gen(gen_spec, gen_out);
    if (*solve) return cmd_solve(solve_dir, solve_out);
    if (*cond) return cmd_cond(cond_dir, preset, form, Lspec);
    if (*exp) return cmd_experiment(pattern, cfg, sizes, csv, aligned);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const AssumptionViolated& e) {
    std::cerr << "assumption violated: " << e.what() << "\n";
    return kAssumption;
  } catch (const MemoryGuardRefused& e) {
    std::cerr << "memory guard: " << e.what() << "\n";
    return kMemory;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOther;
}
