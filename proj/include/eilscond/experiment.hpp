#pragma once

// Numerical experiment drivers: first-order error bounds, timing of the three
// 2-norm forms, timing and tightness of the mixed/componentwise upper bounds.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "eilscond/genrand.hpp"
#include "eilscond/report.hpp"

namespace eilscond::experiment {

enum class Pattern { ErrBound, FormTiming, UboundTiming, UboundRatio };

Pattern parse_pattern(const std::string& name);
std::string pattern_name(Pattern p);

struct Size {
  Index m = 0, n = 0, s = 0;
};

struct Config {
  GenSpec gen;                 // sizes, conditioning, residual, tau, base seed
  int reps = 20;               // problems per cell; trial t uses seed gen.seed + t
  double epsilon = 1e-9;       // errbound perturbation magnitude
  std::vector<Size> sizes;     // timing grids; p = 2m/3 rounded unless m matches gen
  int inner_reps = 5;          // timed repetitions per cell after one warm-up
  double memory_cap = 0;       // <= 0: default_memory_cap()
};

// errbound -------------------------------------------------------------------

struct ErrBoundRow {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string L;  // "I", "first3" or "convex"
  double tau = 0;
  double r2 = 0, kappa2 = 0, kappa2_bd = 0;
  double rm = 0, kappam = 0, kappam_bd = 0;
  double rc = 0, kappac = 0, kappac_bd = 0;
  double delta_rF = 0, delta_rmax = 0;
};

/// The three projections used by errbound: I_n, [I_3; 0] and a random
/// nonnegative column with unit 1-norm.
std::vector<std::pair<std::string, MatrixXd>> errbound_projections(Index n, std::uint64_t seed);

std::vector<ErrBoundRow> run_errbound(const Config& cfg);

// form-timing ----------------------------------------------------------------

struct FormTimingRow {
  int trial = 0;
  Size size;
  std::string form;          // "kron", "c1", "c2"
  bool skipped = false;      // kron above the memory guard
  double median_seconds = 0;
  double value = 0;
  double projected_entries = 0;
};

std::vector<FormTimingRow> run_form_timing(const Config& cfg);

// ubound-timing --------------------------------------------------------------

struct UboundTimingRow {
  int trial = 0;
  Size size;
  double exact_seconds = 0, bound_seconds = 0;
  double kappam = 0, kappam_U = 0;
};

std::vector<UboundTimingRow> run_ubound_timing(const Config& cfg);

// ubound-ratio ---------------------------------------------------------------

struct UboundRatioRow {
  int trial = 0;
  std::uint64_t seed = 0;
  double kappam = 0, kappam_U = 0, rm = 0;
  double kappac = 0, kappac_U = 0, rc = 0;
};

std::vector<UboundRatioRow> run_ubound_ratio(const Config& cfg);

struct Summary {
  double max = 0, median = 0, min = 0, mean = 0;
};

Summary summarize(std::vector<double> v);

/// Median of `reps` timed calls after one discarded warm-up, on a monotonic clock.
template <typename F>
double time_median(F&& f, int reps);

// report tables --------------------------------------------------------------

report::Table errbound_table(const std::vector<ErrBoundRow>& rows);
report::Table form_timing_table(const std::vector<FormTimingRow>& rows);
report::Table ubound_timing_table(const std::vector<UboundTimingRow>& rows);
report::Table ubound_ratio_table(const std::vector<UboundRatioRow>& rows);

/// Aggregate rows (max/median/min/mean) for the per-trial tables.
report::Table errbound_summary(const std::vector<ErrBoundRow>& rows);
report::Table form_timing_summary(const std::vector<FormTimingRow>& rows);
report::Table ubound_timing_summary(const std::vector<UboundTimingRow>& rows);
report::Table ubound_ratio_summary(const std::vector<UboundRatioRow>& rows);

}  // namespace eilscond::experiment

#include <algorithm>
#include <chrono>

namespace eilscond::experiment {

template <typename F>
double time_median(F&& f, int reps) {
  using clock = std::chrono::steady_clock;
  f();
  std::vector<double> t;
  for (int i = 0; i < std::max(reps, 1); ++i) {
    const auto t0 = clock::now();
    f();
    t.push_back(std::chrono::duration<double>(clock::now() - t0).count());
  }
  return summarize(std::move(t)).median;
}

}  // namespace eilscond::experiment
