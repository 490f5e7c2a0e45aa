#include "gridsim/report.hpp"

#include <ctime>
#include <set>
#include <system_error>

#include "gridsim/error.hpp"
#include "gridsim/grid_io.hpp"
#include "gridsim/text.hpp"
#include "json.hpp"

namespace gridsim {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string sig4(double v) { return format_significant(v, 4); }

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

json parse_document(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": syntax error at byte " + std::to_string(e.byte), e.byte);
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory '" + dir.string() + "'");
}

std::string step_rows(std::size_t n, auto&& row) {
  std::string out;
  for (std::size_t t = 0; t < n; ++t) out += std::to_string(t) + "," + row(t) + "\n";
  return out;
}

}  // namespace

std::string case_table_csv(std::span<const CaseResult> results) {
  std::string out(kCaseTableHeader);
  out += "\n";
  for (const auto& r : results) {
    out += r.scenario_id + "," + std::string(to_string(r.season)) + "," + std::to_string(r.year) + "," +
           sig4(r.penetration) + "," + sig4(r.peak_mw) + "," + sig4(r.par) + "," +
           sig4(r.max_voltage_deviation_percent) + "," + sig4(r.max_trafo_loading_percent) + "\n";
  }
  return out;
}

std::string results_to_json(std::span<const CaseResult> results) {
  json arr = json::array();
  for (const auto& r : results) {
    json j = {{"scenario", r.scenario_id},
              {"case", std::string(to_string(r.case_id))},
              {"season", std::string(to_string(r.season))},
              {"year", r.year},
              {"penetration", r.penetration},
              {"optimized", r.optimized},
              {"demand_multiplier", r.demand_multiplier},
              {"peak_mw", r.peak_mw},
              {"par", r.par},
              {"max_voltage_deviation_percent", r.max_voltage_deviation_percent},
              {"max_trafo_loading_percent", r.max_trafo_loading_percent},
              {"ev_energy_mwh", r.ev_energy_mwh},
              {"primary_p_mw", r.primary_p_mw},
              {"primary_loading_pct", r.primary_loading_pct},
              {"worst_bus", r.worst_bus},
              {"worst_bus_v_pu", r.worst_bus_v_pu},
              {"facility_unoptimized_kw", r.facility_unoptimized_kw},
              {"facility_optimized_kw", r.facility_optimized_kw}};
    j["max_voltage_change_percent"] = r.max_voltage_change_percent ? json(*r.max_voltage_change_percent) : json(nullptr);
    arr.push_back(std::move(j));
  }
  return json({{"format", "gridsim-results/1"}, {"results", arr}}).dump(2) + "\n";
}

std::vector<CaseResult> results_from_json(std::string_view text) {
  const json doc = parse_document(text, "results");
  if (!doc.is_object() || field<std::string>(doc, "format", "results") != "gridsim-results/1") {
    throw ParseError("results: unsupported format, expected 'gridsim-results/1'");
  }
  const json& arr = doc.at("results");
  if (!arr.is_array()) throw ParseError("results: 'results' must be an array");
  std::vector<CaseResult> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const json& j = arr[i];
    const std::string where = "results: entry " + std::to_string(i);
    CaseResult r;
    r.scenario_id = field<std::string>(j, "scenario", where);
    const auto c = parse_case_id(field<std::string>(j, "case", where));
    const auto s = parse_season(field<std::string>(j, "season", where));
    if (!c || !s) throw ParseError(where + ": unknown case or season");
    r.case_id = *c;
    r.season = *s;
    r.year = field<int>(j, "year", where);
    r.penetration = field<double>(j, "penetration", where);
    r.optimized = field<bool>(j, "optimized", where);
    r.demand_multiplier = field<double>(j, "demand_multiplier", where);
    r.peak_mw = field<double>(j, "peak_mw", where);
    r.par = field<double>(j, "par", where);
    r.max_voltage_deviation_percent = field<double>(j, "max_voltage_deviation_percent", where);
    if (j.contains("max_voltage_change_percent") && !j.at("max_voltage_change_percent").is_null()) {
      r.max_voltage_change_percent = field<double>(j, "max_voltage_change_percent", where);
    }
    r.max_trafo_loading_percent = field<double>(j, "max_trafo_loading_percent", where);
    r.ev_energy_mwh = field<double>(j, "ev_energy_mwh", where);
    r.primary_p_mw = field<std::vector<double>>(j, "primary_p_mw", where);
    r.primary_loading_pct = field<std::vector<double>>(j, "primary_loading_pct", where);
    r.worst_bus = field<std::string>(j, "worst_bus", where);
    r.worst_bus_v_pu = field<std::vector<double>>(j, "worst_bus_v_pu", where);
    r.facility_unoptimized_kw = field<std::vector<double>>(j, "facility_unoptimized_kw", where);
    r.facility_optimized_kw = field<std::vector<double>>(j, "facility_optimized_kw", where);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<fs::path> emit_case_tables(std::span<const CaseResult> results, const fs::path& dir) {
  if (results.empty()) throw ValidationError("no results to tabulate");
  ensure_dir(dir);
  std::vector<fs::path> written;
  for (CaseId c : {CaseId::I, CaseId::II, CaseId::III, CaseId::IV}) {
    std::vector<CaseResult> rows;
    for (const auto& r : results) {
      if (r.case_id == c) rows.push_back(r);
    }
    if (rows.empty()) continue;
    const fs::path p = dir / ("case_" + std::string(to_string(c)) + ".csv");
    write_text_file(p, case_table_csv(rows));
    written.push_back(p);
  }
  const fs::path agg = dir / "results.json";
  write_text_file(agg, results_to_json(results));
  written.push_back(agg);
  return written;
}

std::string loading_csv(const CaseResult& r) {
  return "step,primary_loading_pct,primary_p_mw\n" + step_rows(r.primary_loading_pct.size(), [&](std::size_t t) {
           return format_number(r.primary_loading_pct[t]) + "," + format_number(r.primary_p_mw.at(t));
         });
}

std::string voltage_csv(const CaseResult& r) {
  return "step,bus,v_pu\n" +
         step_rows(r.worst_bus_v_pu.size(), [&](std::size_t t) { return r.worst_bus + "," + format_number(r.worst_bus_v_pu[t]); });
}

std::string facility_csv(const CaseResult& r) {
  return "step,unoptimized_kw,optimized_kw\n" + step_rows(r.facility_unoptimized_kw.size(), [&](std::size_t t) {
           return format_number(r.facility_unoptimized_kw[t]) + "," + format_number(r.facility_optimized_kw.at(t));
         });
}

std::vector<fs::path> export_plot_data(const CaseResult& r, const fs::path& dir) {
  ensure_dir(dir);
  std::vector<fs::path> out{dir / (r.scenario_id + "_loading.csv"), dir / (r.scenario_id + "_voltage.csv")};
  write_text_file(out[0], loading_csv(r));
  write_text_file(out[1], voltage_csv(r));
  if (!r.facility_unoptimized_kw.empty()) {
    out.push_back(dir / (r.scenario_id + "_facility.csv"));
    write_text_file(out.back(), facility_csv(r));
  }
  return out;
}

std::string manifest_to_json(const RunManifest& m) {
  json j = {{"format", "gridsim-manifest/1"},
            {"tool_version", m.tool_version},
            {"grid_file", m.grid_file},
            {"calibration_file", m.calibration_file},
            {"cases_file", m.cases_file},
            {"calibration_factor", m.calibration_factor},
            {"scenario_ids", m.scenario_ids},
            {"timestamp", m.timestamp},
            {"outputs", m.outputs},
            {"tables", m.tables}};
  j["grid_seed"] = m.grid_seed ? json(*m.grid_seed) : json(nullptr);
  j["case_filter"] = m.case_filter ? json(*m.case_filter) : json(nullptr);
  j["season_filter"] = m.season_filter ? json(*m.season_filter) : json(nullptr);
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(std::string_view text) {
  const json j = parse_document(text, "manifest");
  if (!j.is_object() || field<std::string>(j, "format", "manifest") != "gridsim-manifest/1") {
    throw ParseError("manifest: unsupported format, expected 'gridsim-manifest/1'");
  }
  RunManifest m;
  m.tool_version = field<std::string>(j, "tool_version", "manifest");
  m.grid_file = field<std::string>(j, "grid_file", "manifest");
  m.calibration_file = field<std::string>(j, "calibration_file", "manifest");
  m.cases_file = field<std::string>(j, "cases_file", "manifest");
  m.calibration_factor = field<double>(j, "calibration_factor", "manifest");
  m.scenario_ids = field<std::vector<std::string>>(j, "scenario_ids", "manifest");
  m.timestamp = field<std::string>(j, "timestamp", "manifest");
  m.outputs = field<std::map<std::string, std::vector<std::string>>>(j, "outputs", "manifest");
  m.tables = field<std::vector<std::string>>(j, "tables", "manifest");
  if (j.contains("grid_seed") && !j["grid_seed"].is_null()) m.grid_seed = j["grid_seed"].get<std::uint64_t>();
  if (j.contains("case_filter") && !j["case_filter"].is_null()) m.case_filter = j["case_filter"].get<std::string>();
  if (j.contains("season_filter") && !j["season_filter"].is_null()) m.season_filter = j["season_filter"].get<std::string>();
  return m;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace gridsim
