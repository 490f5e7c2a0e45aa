#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridsim/charging.hpp"
#include "gridsim/grid.hpp"
#include "gridsim/powerflow.hpp"
#include "gridsim/profiles.hpp"

namespace gridsim {

enum class CaseId { I, II, III, IV };

std::string_view to_string(CaseId c);
std::optional<CaseId> parse_case_id(std::string_view s);

struct ScenarioSpec {
  std::string id;
  CaseId case_id = CaseId::I;
  int year = 2020;
  Season season = Season::Winter;
  double household_penetration = 0.0;
  std::vector<FacilitySpec> pr_facilities;
  bool optimized = false;
  double growth_rate_per_year = 0.0;
  std::map<int, double> growth_table;  ///< overrides the linear rate for listed years
  std::uint64_t seed = 1;
  double pr_occupancy = 0.7;  ///< share of P&R chargers with a session

  bool operator==(const ScenarioSpec&) const = default;
  double demand_multiplier() const;
};

/// Throws ValidationError when a spec breaks the case rules: Cases I and II
/// carry no facilities, Case III carries three, and so on.
void check_scenario(const ScenarioSpec& spec);

/// Every scenario of Cases I-IV for both seasons.
std::vector<ScenarioSpec> builtin_catalog();

/// The three facilities of Cases III and IV on trunk nodes of feeders 2, 4 and 6.
std::vector<FacilitySpec> default_pr_facilities();

std::string catalog_to_json(std::span<const ScenarioSpec> specs);
std::vector<ScenarioSpec> catalog_from_json(std::string_view text);

struct CaseResult {
  std::string scenario_id;
  CaseId case_id = CaseId::I;
  Season season = Season::Winter;
  int year = 2020;
  double penetration = 0.0;
  bool optimized = false;
  double demand_multiplier = 1.0;

  double peak_mw = 0.0;  ///< primary transformer, HV side
  double par = 1.0;
  double max_voltage_deviation_percent = 0.0;  ///< MV buses against nominal
  std::optional<double> max_voltage_change_percent;  ///< MV buses against the no-EV run
  double max_trafo_loading_percent = 0.0;           ///< primary transformer
  double ev_energy_mwh = 0.0;

  std::vector<double> primary_p_mw;         ///< per step
  std::vector<double> primary_loading_pct;  ///< per step
  std::string worst_bus;                    ///< MV bus with the largest deviation
  std::vector<double> worst_bus_v_pu;       ///< per step
  std::vector<double> facility_unoptimized_kw;  ///< sum over facilities; empty without P&R
  std::vector<double> facility_optimized_kw;

  std::shared_ptr<const SolutionSeries> series;  ///< in memory only

  /// Field-wise equality, ignoring the in-memory series.
  bool same_values(const CaseResult& other) const;
};

/// max / mean. Throws ValidationError for an empty or all-zero series.
double compute_par(std::span<const double> samples);

/// max over steps and the given buses of |1 - V| in percent. Throws
/// NumericalError when a step did not converge.
double compute_max_voltage_deviation(const SolutionSeries& series, std::span<const int> buses);

/// max over steps and buses of |V - V_baseline| in percent.
double compute_max_voltage_change(const SolutionSeries& series, const SolutionSeries& baseline,
                                  std::span<const int> buses);

/// (peak / baseline peak - 1) in percent.
double peak_increase_percent(const CaseResult& result, const CaseResult& baseline);

/// Bus indices at 15 kV.
std::vector<int> mv_bus_indices(const Grid& grid);

/// Runs one scenario on an already calibrated grid.
CaseResult run_case(const Grid& grid, const ProfileLibrary& profiles, const ScenarioSpec& spec);

/// Runs every spec, in parallel across scenarios, and fills the voltage change
/// against a no-EV run of the same season and year. Results keep input order.
std::vector<CaseResult> run_cases(const Grid& grid, const ProfileLibrary& profiles, std::span<const ScenarioSpec> specs);

struct CalibrationAnchor {
  double penetration = 0.45;
  Season season = Season::Winter;
  double target_loading_percent = 83.87;
  std::uint64_t seed = 2020;
};

struct Calibration {
  double factor = 1.0;
  double achieved_loading_percent = 0.0;
  int iterations = 0;
  CalibrationAnchor anchor;
};

/// Primary transformer peak loading of the anchor scenario after scaling all
/// demand by `factor`.
double anchor_loading(const Grid& grid, const ProfileLibrary& profiles, const CalibrationAnchor& anchor, double factor);

/// Bisection over a uniform demand multiplier in [0.1, 3.0] so that the anchor
/// scenario reaches the target loading. Throws ValidationError when the target
/// lies outside what the bounds can reach.
Calibration calibrate_baseline(const Grid& grid, const ProfileLibrary& profiles, const CalibrationAnchor& anchor = {});

std::string calibration_to_json(const Calibration& calibration);
Calibration calibration_from_json(std::string_view text);

}  // namespace gridsim
