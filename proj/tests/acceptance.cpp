// Acceptance suite: one PASS/FAIL line per criterion, details indented
// underneath. Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "gridsim/charging.hpp"
#include "gridsim/grid_io.hpp"
#include "gridsim/powerflow.hpp"
#include "gridsim/report.hpp"
#include "gridsim/scenario.hpp"
#include "gridsim/synth.hpp"
#include "gridsim/text.hpp"
#include "oracles/schedule_oracle.hpp"
#include "oracles/zbus_oracle.hpp"
#include "support/census.hpp"
#include "support/random_grid.hpp"

using namespace gridsim;
using Clock = std::chrono::steady_clock;

namespace tol {
constexpr double kOracleVoltagePu = 1e-6;
constexpr double kOracleRuntimeS = 10.0;
constexpr double kTwoBusPu = 1e-9;
constexpr double kSchedulePeakKw = 1e-3;
constexpr double kEnergyKwh = 1e-6;
constexpr double kAnchorPts = 0.1;
constexpr double kCaseRuntimeS = 60.0;
constexpr double kVoltageBandPu = 0.10;
}  // namespace tol

namespace {

int failures = 0;

struct Detail {
  std::vector<std::string> lines;
  bool ok = true;

  __attribute__((format(printf, 3, 4))) void check(bool cond, const char* fmt, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    lines.push_back(std::string(cond ? "  ok   " : "  MISS ") + buf);
    ok = ok && cond;
  }
};

void report(int n, const char* title, const Detail& d) {
  std::printf("[%s] criterion %d: %s\n", d.ok ? "PASS" : "FAIL", n, title);
  for (const auto& l : d.lines) std::printf("%s\n", l.c_str());
  std::fflush(stdout);
  if (!d.ok) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const CaseResult& find(const std::vector<CaseResult>& rs, const std::string& id) {
  for (const auto& r : rs) {
    if (r.scenario_id == id) return r;
  }
  std::fprintf(stderr, "missing scenario %s\n", id.c_str());
  std::exit(100);
}

void criterion_oracle_equivalence() {
  Detail d;
  const auto t0 = Clock::now();
  double worst = 0.0;
  int converged = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto rc = support::random_radial_case(seed, 10);
    const auto sol = solve_snapshot(rc.grid, rc.injections);
    converged += sol.converged;
    const auto ref = oracle::zbus_fixed_point(rc.grid, rc.injections);
    for (std::size_t k = 0; k < ref.size(); ++k) worst = std::max(worst, std::abs(sol.v_pu[k] - std::abs(ref[k])));
  }
  const double elapsed = seconds_since(t0);
  d.check(converged == 100, "%d/100 random grids converged", converged);
  d.check(worst < tol::kOracleVoltagePu, "max |dV| vs nodal fixed point = %.3g pu (< %.0e)", worst, tol::kOracleVoltagePu);
  d.check(elapsed < tol::kOracleRuntimeS, "runtime %.3f s (< %.0f s)", elapsed, tol::kOracleRuntimeS);
  report(1, "power-flow oracle equivalence", d);
}

void criterion_two_bus() {
  Detail d;
  const double expected = oracle::two_bus_voltage_kv(15.0, 0.2, 0.1, 1.0, 0.0) / 15.0;
  const Grid g = support::two_bus_grid(15.0, 0.2, 0.1);
  auto inj = SnapshotInjections::zeros(2);
  inj.p_mw[1] = 1.0;
  SolverOptions opt;
  opt.tolerance_pu = 1e-12;
  const auto sol = solve_snapshot(g, inj, opt);
  const double err = std::abs(sol.v_pu[1] - expected);
  d.check(sol.converged, "converged in %d iterations", sol.iterations);
  d.check(err < tol::kTwoBusPu, "|V| = %.16f pu, closed form %.16f, error %.3g (< %.0e)", sol.v_pu[1], expected, err,
          tol::kTwoBusPu);
  report(2, "two-bus closed form", d);
}

void criterion_scheduler() {
  Detail d;
  FacilitySpec f;
  f.id = "PR";
  f.connection_bus = "X";
  std::mt19937_64 gen(3);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); };
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); };
  auto instance = [&](int max_sessions, int horizon, int first_step) {
    std::vector<ChargingSession> s;
    const int n = pick(1, max_sessions);
    for (int i = 0; i < n; ++i) {
      const int a = first_step + pick(0, horizon - 1);
      const int dep = pick(a + 1, first_step + horizon);
      const double cap = uni(1.0, 3.3);
      s.push_back({"EV" + std::to_string(i), a, dep, uni(0.0, 1.0) * cap * 0.25 * (dep - a), cap});
    }
    return s;
  };
  auto energy_error = [](const std::vector<ChargingSession>& s, const ScheduleResult& r) {
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      double kwh = 0.0;
      for (double p : r.power_kw[i]) kwh += p * 0.25;
      worst = std::max(worst, std::abs(kwh - s[i].energy_kwh));
    }
    return worst;
  };

  double worst_gap = 0.0;
  for (int k = 0; k < 200; ++k) {
    const int horizon = pick(1, 6);
    const auto s = instance(3, horizon, 0);
    worst_gap = std::max(worst_gap, std::abs(schedule_min_peak(s, f).peak_kw - oracle::min_peak_by_subsets(s, horizon)));
  }
  d.check(worst_gap < tol::kSchedulePeakKw, "200 small instances: max |peak - enumeration oracle| = %.3g kW (< %.0e)",
          worst_gap, tol::kSchedulePeakKw);

  int dominated = 0, total = 0;
  double worst_energy = 0.0;
  auto large = [&](const std::vector<ChargingSession>& s) {
    const auto opt = schedule_min_peak(s, f);
    const auto raw = schedule_unoptimized(s);
    dominated += opt.peak_kw <= raw.peak_kw + 1e-9;
    ++total;
    worst_energy = std::max({worst_energy, energy_error(s, opt), energy_error(s, raw)});
  };
  for (int k = 0; k < 60; ++k) large(instance(pick(1, 300), 80, pick(0, 15)));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) large(generate_sessions(f, 0.7, seed));
  d.check(dominated == total, "peak(opt) <= peak(unopt) on %d/%d instances up to 700 sessions", dominated, total);
  d.check(worst_energy < tol::kEnergyKwh, "max per-session energy error %.3g kWh (< %.0e)", worst_energy, tol::kEnergyKwh);
  report(3, "scheduler optimality", d);
}

struct Study {
  Grid grid;
  ProfileLibrary profiles;
  Calibration calibration;
  std::vector<CaseResult> results;
  std::map<CaseId, double> seconds;
};

Study run_study() {
  Study st;
  const Grid raw = synthesize_reference_grid(2020);
  st.profiles = builtin_profile_library();
  st.calibration = calibrate_baseline(raw, st.profiles);
  st.grid = scale_demand(raw, st.calibration.factor);
  const auto catalog = builtin_catalog();
  for (CaseId c : {CaseId::I, CaseId::II, CaseId::III, CaseId::IV}) {
    std::vector<ScenarioSpec> subset;
    for (const auto& s : catalog) {
      if (s.case_id == c) subset.push_back(s);
    }
    const auto t0 = Clock::now();
    auto rs = run_cases(st.grid, st.profiles, subset);
    st.seconds[c] = seconds_since(t0);
    for (auto& r : rs) st.results.push_back(std::move(r));
  }
  return st;
}

void criterion_anchor(const Study& st) {
  Detail d;
  const double loading = find(st.results, "I-winter-p45").max_trafo_loading_percent;
  d.check(std::abs(loading - 83.87) <= tol::kAnchorPts, "Case I winter 45%%: %.3f%% (83.87 +/- %.1f), factor %.6f",
          loading, tol::kAnchorPts, st.calibration.factor);
  report(4, "calibration anchor", d);
}

void criterion_cross_checks(const Study& st) {
  Detail d;
  const double ii = find(st.results, "II-winter-2026").max_trafo_loading_percent;
  d.check(ii > 90.0 && ii <= 95.0, "Case II winter 2026 loading %.2f%% (> 90, within 5 pts)", ii);

  const double iv = find(st.results, "IV-winter-2030-unopt").max_trafo_loading_percent;
  d.check(iv >= 95.0 && std::abs(iv - 99.99) <= 5.0, "Case IV winter 2030 unoptimized loading %.2f%% (>= 95, 99.99 +/- 5)",
          iv);
  const double iv_opt = find(st.results, "IV-winter-2030-opt").max_trafo_loading_percent;
  d.lines.push_back("  info Case IV winter 2030 optimized loading " + format_significant(iv_opt, 4) + "%");

  const auto& base = find(st.results, "I-winter-p00");
  const double up = peak_increase_percent(find(st.results, "III-winter-unopt"), base);
  const double op = peak_increase_percent(find(st.results, "III-winter-opt"), base);
  d.check(std::abs(up - 16.0) <= 3.0, "Case III winter peak increase, unoptimized %.2f%% (16 +/- 3)", up);
  d.check(std::abs(op - 6.0) <= 3.0, "Case III winter peak increase, optimized %.2f%% (6 +/- 3)", op);

  const double par_u = find(st.results, "III-winter-unopt").par;
  const double par_o = find(st.results, "III-winter-opt").par;
  d.check(std::abs(par_u - 1.48) <= 0.05, "Case III winter PAR, unoptimized %.3f (1.48 +/- 0.05)", par_u);
  d.check(std::abs(par_o - 1.25) <= 0.05, "Case III winter PAR, optimized %.3f (1.25 +/- 0.05)", par_o);

  const double inc = find(st.results, "I-winter-p45").max_voltage_deviation_percent - base.max_voltage_deviation_percent;
  d.check(std::abs(inc - 1.0) <= 0.5, "Case I winter voltage-deviation increment 0%% -> 45%%: %.3f pt (1.0 +/- 0.5)", inc);

  for (auto [c, s] : st.seconds) {
    d.check(s < tol::kCaseRuntimeS, "Case %s (both seasons) ran in %.2f s (< %.0f s)", std::string(to_string(c)).c_str(),
            s, tol::kCaseRuntimeS);
  }
  report(5, "held-out cross-checks", d);
}

void criterion_en50160(const Study& st) {
  Detail d;
  const auto mv = mv_bus_indices(st.grid);
  double vmin = 2.0, vmax = 0.0;
  int violations = 0;
  for (const auto& r : st.results) {
    for (const auto& s : r.series->steps) {
      for (int b : mv) {
        const double v = s.v_pu[static_cast<std::size_t>(b)];
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
        violations += std::abs(v - 1.0) > tol::kVoltageBandPu;
      }
    }
  }
  d.check(violations == 0, "%d MV bus-steps outside +/-10%% over %zu scenarios; range [%.4f, %.4f] pu", violations,
          st.results.size(), vmin, vmax);
  report(6, "EN50160 voltage band", d);
}

void criterion_properties(const Study& st) {
  Detail d;

  bool mono = true;
  for (const char* season : {"winter", "summer"}) {
    double peak = 0.0, load = 0.0;
    for (const char* p : {"p00", "p11", "p35", "p45"}) {
      const auto& r = find(st.results, std::string("I-") + season + "-" + p);
      mono = mono && r.peak_mw >= peak && r.max_trafo_loading_percent >= load;
      peak = r.peak_mw;
      load = r.max_trafo_loading_percent;
    }
  }
  d.check(mono, "peak and loading non-decreasing in penetration (Case I, both seasons)");

  bool dominance = true, energy = true;
  int pairs = 0;
  for (const auto& r : st.results) {
    if (!r.optimized) continue;
    std::string id = r.scenario_id;
    id.replace(id.size() - 3, 3, "unopt");
    const auto& u = find(st.results, id);
    dominance = dominance && r.peak_mw <= u.peak_mw && r.par <= u.par;
    energy = energy && std::abs(r.ev_energy_mwh - u.ev_energy_mwh) <= 1e-6 * u.ev_energy_mwh;
    ++pairs;
  }
  d.check(dominance, "optimized peak and PAR never exceed unoptimized (%d pairs)", pairs);
  d.check(energy, "EV energy identical with and without optimization (%d pairs)", pairs);

  std::size_t census_bad = 0;
  for (std::uint64_t seed : {1u, 2u, 3u, 2020u, 99999u}) census_bad += support::census_mismatches(synthesize_reference_grid(seed)).size();
  d.check(census_bad == 0, "grid synthesis census exact for 5 seeds (%zu mismatches)", census_bad);

  const bool grid_same = serialize_grid(synthesize_reference_grid(2020)) == serialize_grid(synthesize_reference_grid(2020));
  const auto again = run_study();
  bool runs_same = again.results.size() == st.results.size();
  for (std::size_t i = 0; runs_same && i < st.results.size(); ++i) runs_same = st.results[i].same_values(again.results[i]);
  const bool bytes_same = results_to_json(st.results) == results_to_json(again.results) &&
                          case_table_csv(st.results) == case_table_csv(again.results);
  d.check(grid_same && runs_same && bytes_same, "reruns byte-identical (grid, results, tables)");
  report(7, "property suite", d);
}

}  // namespace

int main() {
  criterion_oracle_equivalence();
  criterion_two_bus();
  criterion_scheduler();
  const Study st = run_study();
  criterion_anchor(st);
  criterion_cross_checks(st);
  criterion_en50160(st);
  criterion_properties(st);
  std::printf("%d of 7 criteria failed\n", failures);
  return failures;
}
