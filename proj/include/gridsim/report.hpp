#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridsim/scenario.hpp"

namespace gridsim {

/// Column order of the per-case tables.
inline constexpr std::string_view kCaseTableHeader =
    "scenario,season,year,penetration,peak_mw,par,max_voltage_dev_pct,max_trafo_loading_pct";

/// One row per result, numbers at 4 significant digits.
std::string case_table_csv(std::span<const CaseResult> results);

/// Scalar fields and per-step series of every result. Doubles round-trip exactly.
std::string results_to_json(std::span<const CaseResult> results);
std::vector<CaseResult> results_from_json(std::string_view text);

/// Writes `case_<id>.csv` for each case present and `results.json` into `dir`.
/// Returns the written paths. Throws ValidationError on an empty set (before
/// touching the filesystem) and IoError when `dir` is not writable.
std::vector<std::filesystem::path> emit_case_tables(std::span<const CaseResult> results,
                                                    const std::filesystem::path& dir);

/// `<scenario>_loading.csv`, `<scenario>_voltage.csv` and, with P&R facilities,
/// `<scenario>_facility.csv`.
std::vector<std::filesystem::path> export_plot_data(const CaseResult& result, const std::filesystem::path& dir);

std::string loading_csv(const CaseResult& result);
std::string voltage_csv(const CaseResult& result);
std::string facility_csv(const CaseResult& result);

struct RunManifest {
  std::string tool_version;
  std::optional<std::uint64_t> grid_seed;
  std::string grid_file;
  std::string calibration_file;
  std::string cases_file;
  std::optional<std::string> case_filter;
  std::optional<std::string> season_filter;
  double calibration_factor = 1.0;
  std::vector<std::string> scenario_ids;
  std::string timestamp;  ///< UTC, ISO 8601
  std::map<std::string, std::vector<std::string>> outputs;  ///< scenario id -> paths relative to the run dir
  std::vector<std::string> tables;

  bool operator==(const RunManifest&) const = default;
};

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(std::string_view text);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace gridsim
