#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gridsim/grid.hpp"
#include "gridsim/powerflow.hpp"
#include "gridsim/profiles.hpp"

namespace gridsim {

/// Household EV fleet. Defaults: 3.3 kW chargers, 6.6 kWh per EV per day,
/// plug-in times normal around 19:00 with a two-hour spread.
struct EvFleetSpec {
  double penetration = 0.0;  ///< fraction of vehicles that are EVs
  int cars_per_household = 2;
  double charger_kw = 3.3;
  double daily_energy_kwh = 6.6;
  double start_mean_step = 76.0;
  double start_sd_steps = 8.0;
  std::uint64_t seed = 1;
};

/// Throws ValidationError when the fleet parameters are out of range.
void check_fleet(const EvFleetSpec& fleet);

/// round(n_households * cars_per_household * penetration).
int ev_count(const EvFleetSpec& fleet, int n_households);

/// Aggregate household charging demand in absolute kW per step.
///
/// Every EV charges at `charger_kw` for `daily_energy_kwh / charger_kw`
/// hours from a seeded continuous start time, wrapping past midnight. Partial
/// overlap with a step counts pro rata, so the daily integral is exact.
TimeSeriesProfile build_household_ev_profile(const EvFleetSpec& fleet, int n_households);

/// A lumped EV charging load at one bus, absolute kW per step.
struct FacilityLoad {
  std::string bus;
  TimeSeriesProfile profile;
};

/// Everything besides the step index that fixes one day of bus injections.
struct DayInputs {
  const Grid* grid = nullptr;
  const ProfileSet* profiles = nullptr;  ///< already chosen for the season
  double demand_multiplier = 1.0;        ///< growth factor, LV aggregates only
  const TimeSeriesProfile* ev_household = nullptr;  ///< absolute kW, may be null
  std::span<const FacilityLoad> facilities;
};

/// Net bus injections for one step:
///   load:      installed_kw * profile[step], times demand_multiplier for LV aggregates; Q from its power factor
///   household EV kW split over LV aggregates by household count, unity PF
///   facility:  profile[step] kW at its bus, unity PF
///   generator: -(rated_kva * power_factor * profile[step]), Q from power factor
SnapshotInjections compose_bus_injections(const DayInputs& inputs, int step);

/// compose_bus_injections for steps 0..95.
std::vector<SnapshotInjections> compose_day(const DayInputs& inputs);

/// Household EV kW assigned to each LV aggregate at one step, in Grid::loads order
/// (zero for MV customers).
std::vector<double> apportion_household_ev(const Grid& grid, double total_kw);

}  // namespace gridsim
