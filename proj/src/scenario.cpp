#include "gridsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <set>
#include <tuple>

#include "gridsim/error.hpp"
#include "gridsim/load_model.hpp"
#include "gridsim/rng.hpp"
#include "gridsim/synth.hpp"
#include "json.hpp"

namespace gridsim {

using nlohmann::json;

namespace {

constexpr std::uint64_t kCatalogSeed = 2020;

int primary_transformer(const Grid& grid) {
  int found = -1;
  for (std::size_t i = 0; i < grid.transformers.size(); ++i) {
    if (grid.transformers[i].role != TransformerRole::Primary) continue;
    if (found >= 0) throw ValidationError("grid has more than one primary transformer");
    found = static_cast<int>(i);
  }
  if (found < 0) throw ValidationError("grid has no primary transformer");
  return found;
}

ScenarioSpec make_spec(CaseId c, Season season, int year, double penetration) {
  ScenarioSpec s;
  s.case_id = c;
  s.season = season;
  s.year = year;
  s.household_penetration = penetration;
  s.seed = kCatalogSeed;
  return s;
}

std::string pct_tag(double p) {
  const long v = std::lround(p * 100.0);
  return (v < 10 ? "p0" : "p") + std::to_string(v);
}

template <class T>
T field(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

json facility_json(const FacilitySpec& f) {
  return {{"id", f.id},
          {"connection_bus", f.connection_bus},
          {"n_chargers", f.n_chargers},
          {"charger_kw", f.charger_kw},
          {"nominal_power_kw", f.nominal_power_kw}};
}

FacilitySpec facility_from(const json& j, const std::string& where) {
  FacilitySpec f;
  f.id = field<std::string>(j, "id", where);
  f.connection_bus = field<std::string>(j, "connection_bus", where);
  f.n_chargers = field<int>(j, "n_chargers", where);
  f.charger_kw = field<double>(j, "charger_kw", where);
  f.nominal_power_kw = field<double>(j, "nominal_power_kw", where);
  return f;
}

json parse_document(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": syntax error at byte " + std::to_string(e.byte), e.byte);
  }
}

template <class F>
void parallel_for(int n, F&& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::string_view to_string(CaseId c) {
  switch (c) {
    case CaseId::I: return "I";
    case CaseId::II: return "II";
    case CaseId::III: return "III";
    case CaseId::IV: return "IV";
  }
  return "";
}

std::optional<CaseId> parse_case_id(std::string_view s) {
  for (auto c : {CaseId::I, CaseId::II, CaseId::III, CaseId::IV}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

double ScenarioSpec::demand_multiplier() const {
  GrowthModel g;
  g.base_year = 2020;
  g.customer_growth_per_year = growth_rate_per_year;
  g.factor_table = growth_table;
  return g.demand_multiplier(year);
}

void check_scenario(const ScenarioSpec& s) {
  const std::string where = "scenario '" + s.id + "'";
  if (s.id.empty()) throw ValidationError("scenario id must not be empty");
  if (!(s.household_penetration >= 0.0 && s.household_penetration <= 1.0)) {
    throw ValidationError(where + ": household_penetration must lie in [0, 1]");
  }
  if (!(s.pr_occupancy >= 0.0 && s.pr_occupancy <= 1.0)) throw ValidationError(where + ": pr_occupancy must lie in [0, 1]");
  if (!(s.growth_rate_per_year >= 0.0)) throw ValidationError(where + ": growth_rate_per_year must be non-negative");
  if (s.year < 2020) throw ValidationError(where + ": year precedes 2020");
  for (const auto& [year, factor] : s.growth_table) {
    if (!(factor > 0.0)) throw ValidationError(where + ": growth_table factors must be positive");
  }
  const std::size_t n_fac = s.pr_facilities.size();
  switch (s.case_id) {
    case CaseId::I:
      if (n_fac != 0) throw ValidationError(where + ": Case I has no P&R facilities");
      if (s.year != 2020) throw ValidationError(where + ": Case I is set in 2020");
      break;
    case CaseId::II:
      if (n_fac != 0) throw ValidationError(where + ": Case II has no P&R facilities");
      break;
    case CaseId::III:
      if (n_fac != 3) throw ValidationError(where + ": Case III has exactly three P&R facilities");
      break;
    case CaseId::IV:
      break;
  }
  std::set<std::string> buses;
  for (const auto& f : s.pr_facilities) {
    check_facility(f);
    if (!buses.insert(f.connection_bus).second) {
      throw ValidationError(where + ": two facilities share bus '" + f.connection_bus + "'");
    }
  }
}

std::vector<FacilitySpec> default_pr_facilities() {
  std::vector<FacilitySpec> out;
  int k = 0;
  for (int feeder : {2, 4, 6}) {
    FacilitySpec f;
    f.id = "PR" + std::to_string(++k);
    f.connection_bus = reference::trunk_bus_id(feeder, 10);
    f.n_chargers = 1000;
    f.charger_kw = 3.3;
    f.nominal_power_kw = default_nominal_power_kw(f.n_chargers, f.charger_kw);
    out.push_back(f);
  }
  return out;
}

std::vector<ScenarioSpec> builtin_catalog() {
  std::vector<ScenarioSpec> out;
  for (Season season : {Season::Winter, Season::Summer}) {
    const std::string sn(to_string(season));
    for (double p : {0.0, 0.11, 0.35, 0.45}) {
      auto s = make_spec(CaseId::I, season, 2020, p);
      s.id = "I-" + sn + "-" + pct_tag(p);
      out.push_back(s);
    }
    for (auto [year, p] : {std::pair{2020, 0.35}, std::pair{2023, 0.47}, std::pair{2026, 0.50}}) {
      auto s = make_spec(CaseId::II, season, year, p);
      s.id = "II-" + sn + "-" + std::to_string(year);
      s.growth_rate_per_year = 0.013;
      s.growth_table = {{2023, 1.049}, {2026, 1.078}};
      out.push_back(s);
    }
    for (bool opt : {false, true}) {
      auto s = make_spec(CaseId::III, season, 2020, 0.35);
      s.id = "III-" + sn + (opt ? "-opt" : "-unopt");
      s.pr_facilities = default_pr_facilities();
      s.optimized = opt;
      out.push_back(s);
    }
    for (auto [year, p] : {std::pair{2020, 0.10}, std::pair{2025, 0.30}, std::pair{2030, 0.50}}) {
      for (bool opt : {false, true}) {
        auto s = make_spec(CaseId::IV, season, year, p);
        s.id = "IV-" + sn + "-" + std::to_string(year) + (opt ? "-opt" : "-unopt");
        s.growth_rate_per_year = 0.009;
        s.pr_facilities = default_pr_facilities();
        s.optimized = opt;
        out.push_back(s);
      }
    }
  }
  return out;
}

std::string catalog_to_json(std::span<const ScenarioSpec> specs) {
  json arr = json::array();
  for (const auto& s : specs) {
    json table = json::object();
    for (const auto& [year, factor] : s.growth_table) table[std::to_string(year)] = factor;
    json fac = json::array();
    for (const auto& f : s.pr_facilities) fac.push_back(facility_json(f));
    arr.push_back({{"id", s.id},
                   {"case", std::string(to_string(s.case_id))},
                   {"year", s.year},
                   {"season", std::string(to_string(s.season))},
                   {"household_penetration", s.household_penetration},
                   {"pr_facilities", fac},
                   {"optimized", s.optimized},
                   {"growth_rate_per_year", s.growth_rate_per_year},
                   {"growth_table", table},
                   {"seed", s.seed},
                   {"pr_occupancy", s.pr_occupancy}});
  }
  json doc = {{"format", "gridsim-cases/1"}, {"scenarios", arr}};
  return doc.dump(2) + "\n";
}

std::vector<ScenarioSpec> catalog_from_json(std::string_view text) {
  const json doc = parse_document(text, "cases");
  if (!doc.is_object()) throw ParseError("cases: top level must be an object");
  if (field<std::string>(doc, "format", "cases") != "gridsim-cases/1") {
    throw ParseError("cases: unsupported format, expected 'gridsim-cases/1'");
  }
  const json& arr = doc.at("scenarios");
  if (!arr.is_array()) throw ParseError("cases: 'scenarios' must be an array");
  std::vector<ScenarioSpec> out;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& j = arr[i];
    const std::string where = "cases: scenario " + std::to_string(i);
    if (!j.is_object()) throw ParseError(where + " must be an object");
    ScenarioSpec s;
    s.id = field<std::string>(j, "id", where);
    const auto c = parse_case_id(field<std::string>(j, "case", where));
    if (!c) throw ParseError(where + ": unknown case");
    s.case_id = *c;
    s.year = field<int>(j, "year", where);
    const auto season = parse_season(field<std::string>(j, "season", where));
    if (!season) throw ParseError(where + ": unknown season");
    s.season = *season;
    s.household_penetration = field<double>(j, "household_penetration", where);
    if (j.contains("pr_facilities")) {
      for (const auto& f : j.at("pr_facilities")) s.pr_facilities.push_back(facility_from(f, where + " facility"));
    }
    s.optimized = j.value("optimized", false);
    s.growth_rate_per_year = j.value("growth_rate_per_year", 0.0);
    if (j.contains("growth_table")) {
      for (const auto& [key, value] : j.at("growth_table").items()) {
        try {
          s.growth_table[std::stoi(key)] = value.get<double>();
        } catch (const std::exception&) {
          throw ParseError(where + ": malformed growth_table entry '" + key + "'");
        }
      }
    }
    s.seed = field<std::uint64_t>(j, "seed", where);
    s.pr_occupancy = j.value("pr_occupancy", 0.7);
    if (!ids.insert(s.id).second) throw ValidationError("cases: duplicate scenario id '" + s.id + "'");
    check_scenario(s);
    out.push_back(std::move(s));
  }
  return out;
}

bool CaseResult::same_values(const CaseResult& o) const {
  auto key = [](const CaseResult& r) {
    return std::tie(r.scenario_id, r.case_id, r.season, r.year, r.penetration, r.optimized, r.demand_multiplier,
                    r.peak_mw, r.par, r.max_voltage_deviation_percent, r.max_voltage_change_percent,
                    r.max_trafo_loading_percent, r.ev_energy_mwh, r.primary_p_mw, r.primary_loading_pct, r.worst_bus,
                    r.worst_bus_v_pu, r.facility_unoptimized_kw, r.facility_optimized_kw);
  };
  return key(*this) == key(o);
}

double compute_par(std::span<const double> samples) {
  if (samples.empty()) throw ValidationError("PAR of an empty series");
  const double peak = *std::max_element(samples.begin(), samples.end());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  if (!(peak > 0.0) || !(mean > 0.0)) throw ValidationError("PAR needs a series with positive mean");
  return peak / mean;
}

double compute_max_voltage_deviation(const SolutionSeries& series, std::span<const int> buses) {
  double worst = 0.0;
  for (std::size_t t = 0; t < series.steps.size(); ++t) {
    const auto& s = series.steps[t];
    if (!s.converged) throw NumericalError("voltage deviation over a non-converged step", static_cast<int>(t));
    for (int b : buses) worst = std::max(worst, std::abs(1.0 - s.v_pu[static_cast<std::size_t>(b)]) * 100.0);
  }
  return worst;
}

double compute_max_voltage_change(const SolutionSeries& series, const SolutionSeries& baseline,
                                  std::span<const int> buses) {
  if (series.steps.size() != baseline.steps.size()) throw ValidationError("voltage change: series lengths differ");
  double worst = 0.0;
  for (std::size_t t = 0; t < series.steps.size(); ++t) {
    for (int b : buses) {
      const auto k = static_cast<std::size_t>(b);
      worst = std::max(worst, std::abs(series.steps[t].v_pu[k] - baseline.steps[t].v_pu[k]) * 100.0);
    }
  }
  return worst;
}

double peak_increase_percent(const CaseResult& result, const CaseResult& baseline) {
  if (!(baseline.peak_mw > 0.0)) throw ValidationError("peak increase against a non-positive baseline");
  return (result.peak_mw / baseline.peak_mw - 1.0) * 100.0;
}

std::vector<int> mv_bus_indices(const Grid& grid) {
  std::vector<int> out;
  for (std::size_t i = 0; i < grid.buses.size(); ++i) {
    if (std::abs(grid.buses[i].nominal_kv - reference::kMvKv) < 1e-9) out.push_back(static_cast<int>(i));
  }
  return out;
}

CaseResult run_case(const Grid& grid, const ProfileLibrary& profiles, const ScenarioSpec& spec) {
  check_scenario(spec);
  const int primary = primary_transformer(grid);
  const ProfileSet& set = profiles.for_season(spec.season);

  int households = 0;
  for (const auto& l : grid.loads) households += l.n_households;
  EvFleetSpec fleet;
  fleet.penetration = spec.household_penetration;
  fleet.seed = mix_seed(spec.seed, 0x6876);
  const TimeSeriesProfile ev = build_household_ev_profile(fleet, households);

  CaseResult r;
  r.scenario_id = spec.id;
  r.case_id = spec.case_id;
  r.season = spec.season;
  r.year = spec.year;
  r.penetration = spec.household_penetration;
  r.optimized = spec.optimized;
  r.demand_multiplier = spec.demand_multiplier();

  double ev_kwh = std::accumulate(ev.values.begin(), ev.values.end(), 0.0) * kStepHours;

  std::vector<FacilityLoad> facilities;
  if (!spec.pr_facilities.empty()) {
    r.facility_unoptimized_kw.assign(kStepsPerDay, 0.0);
    r.facility_optimized_kw.assign(kStepsPerDay, 0.0);
  }
  for (std::size_t k = 0; k < spec.pr_facilities.size(); ++k) {
    const auto& f = spec.pr_facilities[k];
    if (grid.bus_index(f.connection_bus) < 0) {
      throw ValidationError("facility '" + f.id + "': unresolved bus reference '" + f.connection_bus + "'");
    }
    const auto sessions = generate_sessions(f, spec.pr_occupancy, mix_seed(spec.seed, 0x5052 + k));
    const auto unopt = schedule_unoptimized(sessions);
    const auto opt = schedule_min_peak(sessions, f);
    for (int t = 0; t < kStepsPerDay; ++t) {
      const auto i = static_cast<std::size_t>(t);
      r.facility_unoptimized_kw[i] += unopt.facility_kw[i];
      r.facility_optimized_kw[i] += opt.facility_kw[i];
    }
    const auto& used = spec.optimized ? opt : unopt;
    TimeSeriesProfile p{f.id, used.facility_kw, spec.season, ProfileClass::PrFacility};
    ev_kwh += std::accumulate(p.values.begin(), p.values.end(), 0.0) * kStepHours;
    facilities.push_back({f.connection_bus, std::move(p)});
  }
  r.ev_energy_mwh = ev_kwh / 1000.0;

  DayInputs in;
  in.grid = &grid;
  in.profiles = &set;
  in.demand_multiplier = r.demand_multiplier;
  in.ev_household = &ev;
  in.facilities = facilities;
  const auto day = compose_day(in);

  std::shared_ptr<SolutionSeries> series;
  try {
    series = std::make_shared<SolutionSeries>(run_quasi_dynamic(RadialNetwork(grid), day));
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " (scenario " + spec.id + ")", e.step());
  }

  const auto mv = mv_bus_indices(grid);
  r.primary_p_mw.reserve(kStepsPerDay);
  r.primary_loading_pct.reserve(kStepsPerDay);
  int worst_bus = mv.empty() ? grid.slack_index() : mv.front();
  double worst_dev = -1.0;
  for (const auto& s : series->steps) {
    r.primary_p_mw.push_back(s.slack_p_mw);
    r.primary_loading_pct.push_back(s.trafo_loading_pct[static_cast<std::size_t>(primary)]);
    for (int b : mv) {
      const double d = std::abs(1.0 - s.v_pu[static_cast<std::size_t>(b)]);
      if (d > worst_dev) {
        worst_dev = d;
        worst_bus = b;
      }
    }
  }
  r.peak_mw = *std::max_element(r.primary_p_mw.begin(), r.primary_p_mw.end());
  r.par = compute_par(r.primary_p_mw);
  r.max_voltage_deviation_percent = compute_max_voltage_deviation(*series, mv);
  r.max_trafo_loading_percent = *std::max_element(r.primary_loading_pct.begin(), r.primary_loading_pct.end());
  r.worst_bus = grid.buses[static_cast<std::size_t>(worst_bus)].id;
  for (const auto& s : series->steps) r.worst_bus_v_pu.push_back(s.v_pu[static_cast<std::size_t>(worst_bus)]);
  r.series = std::move(series);
  return r;
}

std::vector<CaseResult> run_cases(const Grid& grid, const ProfileLibrary& profiles, std::span<const ScenarioSpec> specs) {
  // One no-EV companion run per distinct (season, year, demand multiplier).
  std::vector<ScenarioSpec> jobs(specs.begin(), specs.end());
  std::vector<std::size_t> baseline_of(specs.size());
  std::map<std::tuple<int, int, double>, std::size_t> baselines;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    const auto key = std::make_tuple(static_cast<int>(s.season), s.year, s.demand_multiplier());
    auto it = baselines.find(key);
    if (it == baselines.end()) {
      ScenarioSpec b = s;
      b.id = "no-ev-" + std::string(to_string(s.season)) + "-" + std::to_string(s.year);
      b.case_id = s.case_id == CaseId::I ? CaseId::I : CaseId::II;
      b.household_penetration = 0.0;
      b.pr_facilities.clear();
      b.optimized = false;
      it = baselines.emplace(key, jobs.size()).first;
      jobs.push_back(std::move(b));
    }
    baseline_of[i] = it->second;
  }

  std::vector<CaseResult> all(jobs.size());
  parallel_for(static_cast<int>(jobs.size()),
               [&](int i) { all[static_cast<std::size_t>(i)] = run_case(grid, profiles, jobs[static_cast<std::size_t>(i)]); });

  const auto mv = mv_bus_indices(grid);
  std::vector<CaseResult> out(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(specs.size()));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].max_voltage_change_percent = compute_max_voltage_change(*out[i].series, *all[baseline_of[i]].series, mv);
  }
  return out;
}

double anchor_loading(const Grid& grid, const ProfileLibrary& profiles, const CalibrationAnchor& anchor, double factor) {
  ScenarioSpec spec = make_spec(CaseId::I, anchor.season, 2020, anchor.penetration);
  spec.id = "calibration-anchor";
  spec.seed = anchor.seed;
  return run_case(scale_demand(grid, factor), profiles, spec).max_trafo_loading_percent;
}

Calibration calibrate_baseline(const Grid& grid, const ProfileLibrary& profiles, const CalibrationAnchor& anchor) {
  constexpr double kLo = 0.1;
  constexpr double kHi = 3.0;
  const double target = anchor.target_loading_percent;
  // A factor the solver cannot converge on is treated as overshooting the target.
  auto above = [&](double f) {
    try {
      return anchor_loading(grid, profiles, anchor, f) > target;
    } catch (const NumericalError&) {
      return true;
    }
  };
  if (above(kLo)) throw ValidationError("calibration target unreachable: already exceeded at factor 0.1");
  if (!above(kHi)) throw ValidationError("calibration target unreachable: not reached at factor 3.0");

  Calibration c;
  c.anchor = anchor;
  double lo = kLo;
  double hi = kHi;
  while (c.iterations < 40 && hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    (above(mid) ? hi : lo) = mid;
    ++c.iterations;
  }
  c.factor = 0.5 * (lo + hi);
  c.achieved_loading_percent = anchor_loading(grid, profiles, anchor, c.factor);
  if (std::abs(c.achieved_loading_percent - target) > 0.1) {
    throw NumericalError("calibration stalled at " + std::to_string(c.achieved_loading_percent) + "%");
  }
  return c;
}

std::string calibration_to_json(const Calibration& c) {
  json doc = {{"format", "gridsim-calib/1"},
              {"factor", c.factor},
              {"achieved_loading_percent", c.achieved_loading_percent},
              {"iterations", c.iterations},
              {"anchor",
               {{"penetration", c.anchor.penetration},
                {"season", std::string(to_string(c.anchor.season))},
                {"target_loading_percent", c.anchor.target_loading_percent},
                {"seed", c.anchor.seed}}}};
  return doc.dump(2) + "\n";
}

Calibration calibration_from_json(std::string_view text) {
  const json doc = parse_document(text, "calibration");
  if (!doc.is_object()) throw ParseError("calibration: top level must be an object");
  if (field<std::string>(doc, "format", "calibration") != "gridsim-calib/1") {
    throw ParseError("calibration: unsupported format, expected 'gridsim-calib/1'");
  }
  Calibration c;
  c.factor = field<double>(doc, "factor", "calibration");
  c.achieved_loading_percent = doc.value("achieved_loading_percent", 0.0);
  c.iterations = doc.value("iterations", 0);
  if (doc.contains("anchor")) {
    const json& a = doc.at("anchor");
    c.anchor.penetration = field<double>(a, "penetration", "calibration anchor");
    const auto season = parse_season(field<std::string>(a, "season", "calibration anchor"));
    if (!season) throw ParseError("calibration anchor: unknown season");
    c.anchor.season = *season;
    c.anchor.target_loading_percent = field<double>(a, "target_loading_percent", "calibration anchor");
    c.anchor.seed = field<std::uint64_t>(a, "seed", "calibration anchor");
  }
  if (!(c.factor > 0.0)) throw ValidationError("calibration factor must be positive");
  return c;
}

}  // namespace gridsim
