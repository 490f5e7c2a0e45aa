#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gridsim {

/// A park-and-ride charging facility, modeled as one lumped load.
struct FacilitySpec {
  std::string id;
  std::string connection_bus;
  int n_chargers = 1000;
  double charger_kw = 3.3;
  double nominal_power_kw = 1980.0;  ///< facility cap; 0.6 * n_chargers * charger_kw by default

  bool operator==(const FacilitySpec&) const = default;
};

/// 0.6 * n_chargers * charger_kw.
double default_nominal_power_kw(int n_chargers, double charger_kw);

/// Throws ValidationError unless every field is positive and the cap does
/// not exceed the installed charger power.
void check_facility(const FacilitySpec& facility);

/// One EV plugged in over steps [arrival_step, departure_step).
struct ChargingSession {
  std::string ev_id;
  int arrival_step = 0;
  int departure_step = 1;
  double energy_kwh = 0.0;
  double p_max_kw = 3.3;

  bool operator==(const ChargingSession&) const = default;
  int window_steps() const { return departure_step - arrival_step; }
  /// Most energy the session can take within its window.
  double max_energy_kwh() const;
};

/// Throws ValidationError on a malformed or individually infeasible session.
void check_session(const ChargingSession& session);

/// Per-session power matrix and the facility aggregate, kW per step.
struct ScheduleResult {
  std::vector<std::vector<double>> power_kw;  ///< [session][step]
  std::vector<double> facility_kw;            ///< 96 samples
  double peak_kw = 0.0;
  bool feasible = true;
};

/// Commuter arrival pattern for generated sessions.
struct ArrivalPattern {
  double arrival_mean_step = 32.0;  ///< 08:00
  double arrival_sd_steps = 3.0;
  int arrival_min_step = 24;
  int arrival_max_step = 44;
  double dwell_mean_steps = 34.0;  ///< 8.5 h
  double dwell_sd_steps = 5.0;
  int dwell_min_steps = 8;
  double energy_min_kwh = 4.0;
  double energy_max_kwh = 9.0;
};

/// round(occupancy * n_chargers) seeded sessions; morning arrivals, evening
/// departures, every session feasible on its own.
std::vector<ChargingSession> generate_sessions(const FacilitySpec& facility, double occupancy, std::uint64_t seed,
                                               const ArrivalPattern& pattern = {});

/// Plug-and-charge baseline: full power from arrival until the energy is
/// delivered. The facility cap is ignored.
ScheduleResult schedule_unoptimized(std::span<const ChargingSession> sessions);

/// Minimizes the facility peak subject to per-EV power caps, plug-in windows
/// and exact energy delivery. Among all peak-optimal schedules it returns
/// the one whose facility profile has least variance. `feasible` is false
/// when even the optimal peak exceeds the facility cap.
ScheduleResult schedule_min_peak(std::span<const ChargingSession> sessions, const FacilitySpec& facility);

struct ScheduleViolation {
  std::string code;
  std::string message;
};

struct ScheduleReport {
  std::vector<ScheduleViolation> violations;
  bool ok() const { return violations.empty(); }
  bool has(std::string_view code) const;
  std::string to_string() const;
};

/// Checks the power matrix against every schedule invariant. The facility
/// cap is only checked when `enforce_facility_cap` is set.
ScheduleReport verify_schedule(std::span<const ChargingSession> sessions, const ScheduleResult& result,
                               const FacilitySpec& facility, bool enforce_facility_cap = true);

std::string sessions_to_csv(std::span<const ChargingSession> sessions);
std::vector<ChargingSession> sessions_from_csv(std::string_view text);

/// `ev_id,t00..t95` matrix, one row per session.
std::string schedule_to_csv(std::span<const ChargingSession> sessions, const ScheduleResult& result);
/// `peak_kw,feasible` header plus one data row.
std::string schedule_summary_csv(const ScheduleResult& result);

std::string facility_to_json(const FacilitySpec& facility);
FacilitySpec facility_from_json(std::string_view text);

}  // namespace gridsim
