#include "gridsim/charging.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "gridsim/error.hpp"
#include "gridsim/maxflow.hpp"
#include "gridsim/powerflow.hpp"
#include "gridsim/rng.hpp"
#include "gridsim/text.hpp"

namespace gridsim {

namespace {

constexpr double kEnergyTolKwh = 1e-6;
constexpr double kPowerTolKw = 1e-6;

using StepMask = std::array<bool, kStepsPerDay>;

// Energies are handled in kW*step so that flows and step capacities share a unit.
struct Job {
  int a;
  int d;
  double c;
  double e;
};

double need(const Job& j, const StepMask& in_set, const StepMask& fixed) {
  int outside = 0;
  for (int t = j.a; t < j.d; ++t) {
    if (!fixed[static_cast<std::size_t>(t)] && !in_set[static_cast<std::size_t>(t)]) ++outside;
  }
  return std::max(0.0, j.e - j.c * outside);
}

struct CutResult {
  double gap = 0.0;  // sum of energy minus max flow
  StepMask steps{};
};

// Max flow source -> jobs -> free steps -> sink with every step capped at lambda.
// The reachable steps of the residual graph maximise need(S) - lambda * |S|.
CutResult cut_at(const std::vector<Job>& jobs, const StepMask& fixed, double lambda, double tol) {
  const int n = static_cast<int>(jobs.size());
  const int source = n + kStepsPerDay;
  const int sink = source + 1;
  MaxFlow flow(sink + 1);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const Job& j = jobs[static_cast<std::size_t>(i)];
    flow.add_edge(source, i, j.e);
    total += j.e;
    for (int t = j.a; t < j.d; ++t) {
      if (!fixed[static_cast<std::size_t>(t)]) flow.add_edge(i, n + t, j.c);
    }
  }
  for (int t = 0; t < kStepsPerDay; ++t) {
    if (!fixed[static_cast<std::size_t>(t)]) flow.add_edge(n + t, sink, lambda);
  }
  CutResult out;
  out.gap = total - flow.solve(source, sink, tol);
  const auto side = flow.source_side(source);
  for (int t = 0; t < kStepsPerDay; ++t) {
    out.steps[static_cast<std::size_t>(t)] = !fixed[static_cast<std::size_t>(t)] && side[static_cast<std::size_t>(n + t)];
  }
  return out;
}

// Water levels of the lexicographically optimal step profile. Each round finds
// the densest step set (largest unavoidable demand per step), pins it at that
// level and contracts the instance; the densest level is the optimal peak.
std::array<double, kStepsPerDay> step_levels(std::vector<Job> jobs) {
  std::array<double, kStepsPerDay> level{};
  StepMask fixed{};
  double scale = 1.0;
  for (const auto& j : jobs) scale += j.e;
  const double tol = 1e-12 * scale;

  while (true) {
    std::erase_if(jobs, [&](const Job& j) { return j.e <= tol; });
    if (jobs.empty()) break;

    StepMask set{};
    int count = 0;
    double total = 0.0;
    for (const auto& j : jobs) {
      total += j.e;
      for (int t = j.a; t < j.d; ++t) {
        auto& s = set[static_cast<std::size_t>(t)];
        if (!fixed[static_cast<std::size_t>(t)] && !s) {
          s = true;
          ++count;
        }
      }
    }
    if (count == 0) throw NumericalError("charging schedule: energy left with no free steps");
    double lambda = total / count;

    // Dinkelbach iterations on the ratio need(S) / |S|.
    for (int iter = 0; iter < 200; ++iter) {
      const CutResult cut = cut_at(jobs, fixed, lambda, tol);
      if (cut.gap <= 1e-9 * scale) break;
      int k = 0;
      double h = 0.0;
      for (bool b : cut.steps) k += b;
      if (k == 0) break;
      for (const auto& j : jobs) h += need(j, cut.steps, fixed);
      if (h / k <= lambda) break;
      set = cut.steps;
      lambda = h / k;
    }

    // Just below the optimal ratio the reachable set is the largest densest set.
    const CutResult widest = cut_at(jobs, fixed, lambda * (1.0 - 1e-7), tol);
    bool any = false;
    for (bool b : widest.steps) any = any || b;
    if (any) set = widest.steps;

    for (int t = 0; t < kStepsPerDay; ++t) {
      if (set[static_cast<std::size_t>(t)]) {
        level[static_cast<std::size_t>(t)] = lambda;
        fixed[static_cast<std::size_t>(t)] = true;
      }
    }
    for (auto& j : jobs) {
      int free_steps = 0;
      for (int t = j.a; t < j.d; ++t) free_steps += !fixed[static_cast<std::size_t>(t)];
      j.e = std::min(j.e, j.c * free_steps);
    }
  }
  return level;
}

void finish(ScheduleResult& r) {
  r.facility_kw.assign(kStepsPerDay, 0.0);
  for (const auto& row : r.power_kw) {
    for (int t = 0; t < kStepsPerDay; ++t) r.facility_kw[static_cast<std::size_t>(t)] += row[static_cast<std::size_t>(t)];
  }
  r.peak_kw = *std::max_element(r.facility_kw.begin(), r.facility_kw.end());
}

template <class T>
T parse_field(const std::string& s, int row, const char* name) {
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError("sessions line " + std::to_string(row) + ": malformed " + name + " '" + s + "'");
  }
  return v;
}

}  // namespace

double default_nominal_power_kw(int n_chargers, double charger_kw) { return 0.6 * n_chargers * charger_kw; }

void check_facility(const FacilitySpec& f) {
  if (f.n_chargers <= 0 || !(f.charger_kw > 0.0) || !(f.nominal_power_kw > 0.0)) {
    throw ValidationError("facility '" + f.id + "': chargers, charger_kw and nominal_power_kw must be positive");
  }
  if (f.nominal_power_kw > f.n_chargers * f.charger_kw * (1.0 + 1e-12)) {
    throw ValidationError("facility '" + f.id + "': nominal_power_kw exceeds installed charger power");
  }
}

double ChargingSession::max_energy_kwh() const { return p_max_kw * window_steps() * kStepHours; }

void check_session(const ChargingSession& s) {
  if (s.arrival_step < 0 || s.departure_step > kStepsPerDay - 1 || s.arrival_step >= s.departure_step) {
    throw ValidationError("session '" + s.ev_id + "': steps must satisfy 0 <= arrival < departure <= 95");
  }
  if (!(s.p_max_kw > 0.0)) throw ValidationError("session '" + s.ev_id + "': p_max_kw must be positive");
  if (!(s.energy_kwh >= 0.0)) throw ValidationError("session '" + s.ev_id + "': energy_kwh must be non-negative");
  if (s.energy_kwh > s.max_energy_kwh() + kEnergyTolKwh) {
    throw ValidationError("session '" + s.ev_id + "': infeasible, needs more energy than its window allows");
  }
}

std::vector<ChargingSession> generate_sessions(const FacilitySpec& facility, double occupancy, std::uint64_t seed,
                                               const ArrivalPattern& pat) {
  if (!(occupancy >= 0.0 && occupancy <= 1.0)) throw ValidationError("occupancy must lie in [0, 1]");
  const auto n = static_cast<int>(std::llround(occupancy * facility.n_chargers));
  std::vector<ChargingSession> out;
  out.reserve(static_cast<std::size_t>(n));
  Rng rng(mix_seed(seed, 0x7072));
  for (int i = 0; i < n; ++i) {
    ChargingSession s;
    s.ev_id = facility.id + "-EV" + std::to_string(i + 1);
    s.p_max_kw = facility.charger_kw;
    const auto arrival = std::llround(rng.normal(pat.arrival_mean_step, pat.arrival_sd_steps));
    s.arrival_step = static_cast<int>(std::clamp<long long>(arrival, pat.arrival_min_step, pat.arrival_max_step));
    const auto dwell = std::max<long long>(pat.dwell_min_steps, std::llround(rng.normal(pat.dwell_mean_steps, pat.dwell_sd_steps)));
    s.departure_step = static_cast<int>(std::min<long long>(s.arrival_step + dwell, kStepsPerDay - 1));
    s.energy_kwh = std::min(rng.uniform(pat.energy_min_kwh, pat.energy_max_kwh), s.max_energy_kwh());
    out.push_back(std::move(s));
  }
  return out;
}

ScheduleResult schedule_unoptimized(std::span<const ChargingSession> sessions) {
  ScheduleResult r;
  r.power_kw.reserve(sessions.size());
  for (const auto& s : sessions) {
    check_session(s);
    std::vector<double> row(kStepsPerDay, 0.0);
    double left = s.energy_kwh;
    for (int t = s.arrival_step; t < s.departure_step && left > 0.0; ++t) {
      const double p = std::min(s.p_max_kw, left / kStepHours);
      row[static_cast<std::size_t>(t)] = p;
      left -= p * kStepHours;
    }
    r.power_kw.push_back(std::move(row));
  }
  finish(r);
  return r;
}

ScheduleResult schedule_min_peak(std::span<const ChargingSession> sessions, const FacilitySpec& facility) {
  check_facility(facility);
  std::vector<Job> jobs;
  jobs.reserve(sessions.size());
  for (const auto& s : sessions) {
    check_session(s);
    jobs.push_back({s.arrival_step, s.departure_step, s.p_max_kw, std::min(s.energy_kwh, s.max_energy_kwh()) / kStepHours});
  }
  const auto level = step_levels(jobs);

  // Route the energy through steps capped at their levels.
  const int n = static_cast<int>(jobs.size());
  const int source = n + kStepsPerDay;
  const int sink = source + 1;
  MaxFlow flow(sink + 1);
  std::vector<std::vector<std::pair<int, int>>> edges(jobs.size());
  for (int i = 0; i < n; ++i) {
    const Job& j = jobs[static_cast<std::size_t>(i)];
    flow.add_edge(source, i, j.e);
    for (int t = j.a; t < j.d; ++t) edges[static_cast<std::size_t>(i)].emplace_back(t, flow.add_edge(i, n + t, j.c));
  }
  for (int t = 0; t < kStepsPerDay; ++t) {
    const double cap = level[static_cast<std::size_t>(t)];
    if (cap > 0.0) flow.add_edge(n + t, sink, cap * (1.0 + 1e-10) + 1e-12);
  }
  flow.solve(source, sink, 0.0);

  ScheduleResult r;
  r.power_kw.assign(sessions.size(), std::vector<double>(kStepsPerDay, 0.0));
  for (int i = 0; i < n; ++i) {
    const Job& j = jobs[static_cast<std::size_t>(i)];
    auto& row = r.power_kw[static_cast<std::size_t>(i)];
    double got = 0.0;
    for (const auto& [t, id] : edges[static_cast<std::size_t>(i)]) {
      row[static_cast<std::size_t>(t)] = std::clamp(flow.flow(id), 0.0, j.c);
      got += row[static_cast<std::size_t>(t)];
    }
    // Rounding residue: top up (or trim) inside the window.
    double diff = j.e - got;
    for (int t = j.a; t < j.d && std::abs(diff) > 1e-13; ++t) {
      auto& p = row[static_cast<std::size_t>(t)];
      const double moved = diff > 0.0 ? std::min(diff, j.c - p) : std::max(diff, -p);
      p += moved;
      diff -= moved;
    }
    if (std::abs(diff) * kStepHours > kEnergyTolKwh) {
      throw NumericalError("min-peak schedule could not route the energy of '" + sessions[static_cast<std::size_t>(i)].ev_id + "'");
    }
  }
  finish(r);
  r.feasible = r.peak_kw <= facility.nominal_power_kw + kPowerTolKw;
  return r;
}

bool ScheduleReport::has(std::string_view code) const {
  return std::any_of(violations.begin(), violations.end(), [&](const auto& v) { return v.code == code; });
}

std::string ScheduleReport::to_string() const {
  std::string out;
  for (const auto& v : violations) out += v.code + ": " + v.message + "\n";
  return out;
}

ScheduleReport verify_schedule(std::span<const ChargingSession> sessions, const ScheduleResult& result,
                               const FacilitySpec& facility, bool enforce_facility_cap) {
  ScheduleReport rep;
  auto add = [&](std::string code, std::string msg) { rep.violations.push_back({std::move(code), std::move(msg)}); };

  if (result.power_kw.size() != sessions.size()) {
    add("matrix_shape", "power matrix has " + std::to_string(result.power_kw.size()) + " rows for " +
                            std::to_string(sessions.size()) + " sessions");
    return rep;
  }
  std::vector<double> sum(kStepsPerDay, 0.0);
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    const auto& s = sessions[i];
    const auto& row = result.power_kw[i];
    if (row.size() != static_cast<std::size_t>(kStepsPerDay)) {
      add("matrix_shape", s.ev_id + ": row has " + std::to_string(row.size()) + " steps");
      continue;
    }
    double energy = 0.0;
    for (int t = 0; t < kStepsPerDay; ++t) {
      const double p = row[static_cast<std::size_t>(t)];
      sum[static_cast<std::size_t>(t)] += p;
      energy += p * kStepHours;
      if (p < -kPowerTolKw) add("negative_power", s.ev_id + " step " + std::to_string(t) + ": " + format_number(p) + " kW");
      if (p > s.p_max_kw + kPowerTolKw) {
        add("ev_power_cap", s.ev_id + " step " + std::to_string(t) + ": " + format_number(p) + " kW above cap " +
                                format_number(s.p_max_kw));
      }
      if ((t < s.arrival_step || t >= s.departure_step) && std::abs(p) > kPowerTolKw) {
        add("outside_window", s.ev_id + " draws " + format_number(p) + " kW at step " + std::to_string(t));
      }
    }
    if (std::abs(energy - s.energy_kwh) > kEnergyTolKwh) {
      add("energy_mismatch", s.ev_id + ": delivered " + format_number(energy) + " kWh of " + format_number(s.energy_kwh));
    }
  }
  if (result.facility_kw.size() != static_cast<std::size_t>(kStepsPerDay)) {
    add("matrix_shape", "facility profile must have 96 steps");
    return rep;
  }
  double peak = 0.0;
  for (int t = 0; t < kStepsPerDay; ++t) {
    const double f = result.facility_kw[static_cast<std::size_t>(t)];
    peak = std::max(peak, f);
    if (std::abs(f - sum[static_cast<std::size_t>(t)]) > kPowerTolKw * (1.0 + sessions.size())) {
      add("facility_profile", "step " + std::to_string(t) + ": facility " + format_number(f) + " kW, sessions sum to " +
                                  format_number(sum[static_cast<std::size_t>(t)]));
    }
    if (enforce_facility_cap && f > facility.nominal_power_kw + kPowerTolKw) {
      add("facility_cap", "step " + std::to_string(t) + ": " + format_number(f) + " kW above nominal " +
                              format_number(facility.nominal_power_kw));
    }
  }
  if (std::abs(peak - result.peak_kw) > kPowerTolKw) {
    add("peak_mismatch", "peak_kw " + format_number(result.peak_kw) + " but profile maximum is " + format_number(peak));
  }
  return rep;
}

std::string sessions_to_csv(std::span<const ChargingSession> sessions) {
  std::string out = "ev_id,arrival_step,departure_step,energy_kwh,p_max_kw\n";
  for (const auto& s : sessions) {
    out += s.ev_id + "," + std::to_string(s.arrival_step) + "," + std::to_string(s.departure_step) + "," +
           format_number(s.energy_kwh) + "," + format_number(s.p_max_kw) + "\n";
  }
  return out;
}

std::vector<ChargingSession> sessions_from_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw ParseError("sessions: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "ev_id,arrival_step,departure_step,energy_kwh,p_max_kw") {
    throw ParseError("sessions: header must be 'ev_id,arrival_step,departure_step,energy_kwh,p_max_kw'");
  }
  std::vector<ChargingSession> out;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 5) throw ParseError("sessions line " + std::to_string(row) + ": expected 5 fields");
    ChargingSession s;
    s.ev_id = f[0];
    s.arrival_step = parse_field<int>(f[1], row, "arrival_step");
    s.departure_step = parse_field<int>(f[2], row, "departure_step");
    s.energy_kwh = parse_field<double>(f[3], row, "energy_kwh");
    s.p_max_kw = parse_field<double>(f[4], row, "p_max_kw");
    check_session(s);
    out.push_back(std::move(s));
  }
  return out;
}

std::string schedule_to_csv(std::span<const ChargingSession> sessions, const ScheduleResult& result) {
  std::string out = "ev_id";
  for (int t = 0; t < kStepsPerDay; ++t) out += ",t" + std::string(t < 10 ? "0" : "") + std::to_string(t);
  out += "\n";
  for (std::size_t i = 0; i < sessions.size() && i < result.power_kw.size(); ++i) {
    out += sessions[i].ev_id;
    for (double p : result.power_kw[i]) out += "," + format_number(p);
    out += "\n";
  }
  return out;
}

std::string schedule_summary_csv(const ScheduleResult& result) {
  return "peak_kw,feasible\n" + format_number(result.peak_kw) + "," + (result.feasible ? "true" : "false") + "\n";
}

std::string facility_to_json(const FacilitySpec& f) {
  nlohmann::json j = {{"id", f.id},
                      {"connection_bus", f.connection_bus},
                      {"n_chargers", f.n_chargers},
                      {"charger_kw", f.charger_kw},
                      {"nominal_power_kw", f.nominal_power_kw}};
  return j.dump(2) + "\n";
}

FacilitySpec facility_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("facility: syntax error at byte ") + std::to_string(e.byte), e.byte);
  }
  if (!j.is_object()) throw ParseError("facility: top level must be an object");
  FacilitySpec f;
  try {
    f.id = j.at("id").get<std::string>();
    f.connection_bus = j.value("connection_bus", std::string{});
    f.n_chargers = j.value("n_chargers", 1000);
    f.charger_kw = j.value("charger_kw", 3.3);
    f.nominal_power_kw = j.contains("nominal_power_kw") ? j.at("nominal_power_kw").get<double>()
                                                        : default_nominal_power_kw(f.n_chargers, f.charger_kw);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("facility: ") + e.what());
  }
  check_facility(f);
  return f;
}

}  // namespace gridsim
