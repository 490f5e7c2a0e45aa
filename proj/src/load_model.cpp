#include "gridsim/load_model.hpp"

#include <cmath>

#include "gridsim/error.hpp"
#include "gridsim/rng.hpp"

namespace gridsim {

namespace {

double tan_phi(double power_factor) {
  return std::sqrt(std::max(0.0, 1.0 - power_factor * power_factor)) / power_factor;
}

int require_bus(const std::unordered_map<std::string, int>& index, const std::string& id) {
  auto it = index.find(id);
  if (it == index.end()) throw ValidationError("unresolved bus reference '" + id + "'");
  return it->second;
}

}  // namespace

void check_fleet(const EvFleetSpec& fleet) {
  if (!(fleet.penetration >= 0.0 && fleet.penetration <= 1.0)) {
    throw ValidationError("EV penetration must lie in [0, 1]");
  }
  if (!(fleet.charger_kw > 0.0)) throw ValidationError("charger_kw must be positive");
  if (!(fleet.daily_energy_kwh >= 0.0 && fleet.daily_energy_kwh <= fleet.charger_kw * 24.0)) {
    throw ValidationError("daily_energy_kwh must lie in [0, charger_kw * 24]");
  }
  if (fleet.cars_per_household < 0) throw ValidationError("cars_per_household must be non-negative");
  if (!(fleet.start_sd_steps >= 0.0)) throw ValidationError("start_sd_steps must be non-negative");
}

int ev_count(const EvFleetSpec& fleet, int n_households) {
  return static_cast<int>(std::llround(static_cast<double>(n_households) * fleet.cars_per_household * fleet.penetration));
}

TimeSeriesProfile build_household_ev_profile(const EvFleetSpec& fleet, int n_households) {
  check_fleet(fleet);
  if (n_households < 0) throw ValidationError("n_households must be non-negative");

  TimeSeriesProfile out{"ev_household", std::vector<double>(kStepsPerDay, 0.0), Season::Winter,
                        ProfileClass::EvHousehold};
  const int n_ev = ev_count(fleet, n_households);
  const double duration_steps = fleet.daily_energy_kwh / fleet.charger_kw / kStepHours;
  if (n_ev == 0 || duration_steps <= 0.0) return out;

  Rng rng(mix_seed(fleet.seed, 0x6576));
  const double day = kStepsPerDay;
  for (int e = 0; e < n_ev; ++e) {
    double start = std::fmod(rng.normal(fleet.start_mean_step, fleet.start_sd_steps), day);
    if (start < 0.0) start += day;
    // Walk the charging interval step by step, wrapping at midnight.
    double remaining = duration_steps;
    double pos = start;
    while (remaining > 1e-12) {
      const int step = static_cast<int>(std::floor(pos)) % kStepsPerDay;
      const double step_end = std::floor(pos) + 1.0;
      const double chunk = std::min(remaining, step_end - pos);
      out.values[static_cast<std::size_t>(step)] += fleet.charger_kw * chunk;
      remaining -= chunk;
      pos = step_end;
      if (pos >= day) pos -= day;
    }
  }
  return out;
}

std::vector<double> apportion_household_ev(const Grid& grid, double total_kw) {
  std::vector<double> share(grid.loads.size(), 0.0);
  long long households = 0;
  for (const auto& l : grid.loads) {
    if (l.load_class == LoadClass::LvAggregate) households += l.n_households;
  }
  if (households == 0) return share;
  for (std::size_t i = 0; i < grid.loads.size(); ++i) {
    const auto& l = grid.loads[i];
    if (l.load_class == LoadClass::LvAggregate) {
      share[i] = total_kw * static_cast<double>(l.n_households) / static_cast<double>(households);
    }
  }
  return share;
}

SnapshotInjections compose_bus_injections(const DayInputs& in, int step) {
  if (!in.grid || !in.profiles) throw ValidationError("compose_bus_injections needs a grid and a profile set");
  if (step < 0 || step >= kStepsPerDay) throw ValidationError("step out of range 0..95");
  const Grid& grid = *in.grid;
  const auto index = bus_index_map(grid);
  const auto s = static_cast<std::size_t>(step);

  auto inj = SnapshotInjections::zeros(grid.buses.size());
  auto add = [&](int bus, double p_kw, double q_kvar) {
    inj.p_mw[static_cast<std::size_t>(bus)] += p_kw / 1000.0;
    inj.q_mvar[static_cast<std::size_t>(bus)] += q_kvar / 1000.0;
  };

  const std::vector<double> ev_share =
      in.ev_household ? apportion_household_ev(grid, in.ev_household->values.at(s)) : std::vector<double>{};

  for (std::size_t i = 0; i < grid.loads.size(); ++i) {
    const auto& l = grid.loads[i];
    const int bus = require_bus(index, l.bus);
    const double growth = l.load_class == LoadClass::LvAggregate ? in.demand_multiplier : 1.0;
    const double p = l.installed_kw * in.profiles->at(l.profile_ref).values[s] * growth;
    add(bus, p, p * tan_phi(l.power_factor));
    if (!ev_share.empty() && ev_share[i] != 0.0) add(bus, ev_share[i], 0.0);
  }
  for (const auto& g : grid.generators) {
    const int bus = require_bus(index, g.bus);
    const double p = g.rated_kva * g.power_factor * in.profiles->at(g.profile_ref).values[s];
    add(bus, -p, -p * tan_phi(g.power_factor));
  }
  for (const auto& f : in.facilities) {
    add(require_bus(index, f.bus), f.profile.values.at(s), 0.0);
  }
  return inj;
}

std::vector<SnapshotInjections> compose_day(const DayInputs& inputs) {
  std::vector<SnapshotInjections> day;
  day.reserve(kStepsPerDay);
  for (int t = 0; t < kStepsPerDay; ++t) day.push_back(compose_bus_injections(inputs, t));
  return day;
}

}  // namespace gridsim
