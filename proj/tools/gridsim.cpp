// gridsim command-line front end.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gridsim/charging.hpp"
#include "gridsim/error.hpp"
#include "gridsim/grid_io.hpp"
#include "gridsim/report.hpp"
#include "gridsim/scenario.hpp"
#include "gridsim/synth.hpp"
#include "gridsim/validate.hpp"

namespace fs = std::filesystem;
using namespace gridsim;

namespace {

ProfileLibrary load_profiles(const std::string& dir) {
  return dir.empty() ? builtin_profile_library() : read_profile_library(dir);
}

Grid load_valid_grid(const std::string& path) {
  Grid g = read_grid_file(path);
  const auto report = validate_grid(g);
  if (!report.ok()) throw ValidationError("grid '" + path + "' is invalid:\n" + report.to_string());
  return g;
}

fs::path summary_path(const fs::path& schedule) {
  fs::path p = schedule;
  p.replace_extension(".summary.csv");
  return p;
}

int cmd_synthesize(std::uint64_t seed, const std::string& out) {
  write_grid_file(synthesize_reference_grid(seed), out);
  return 0;
}

int cmd_calibrate(const std::string& grid_path, const std::string& profiles_dir, double target, const std::string& out) {
  const Grid grid = load_valid_grid(grid_path);
  CalibrationAnchor anchor;
  anchor.target_loading_percent = target;
  const Calibration c = calibrate_baseline(grid, load_profiles(profiles_dir), anchor);
  write_text_file(out, calibration_to_json(c));
  std::printf("factor %.9g reaches %.4f%% after %d iterations\n", c.factor, c.achieved_loading_percent, c.iterations);
  return 0;
}

int cmd_run(const std::string& grid_path, const std::string& calib_path, const std::string& cases_path,
            const std::string& case_filter, const std::string& season_filter, const std::string& profiles_dir,
            const std::string& out_dir) {
  const Grid raw = load_valid_grid(grid_path);
  const Calibration calib = calibration_from_json(read_text_file(calib_path));
  auto specs = catalog_from_json(read_text_file(cases_path));

  std::optional<CaseId> want_case;
  std::optional<Season> want_season;
  if (!case_filter.empty()) want_case = parse_case_id(case_filter);
  if (!season_filter.empty()) want_season = parse_season(season_filter);
  std::erase_if(specs, [&](const ScenarioSpec& s) {
    return (want_case && s.case_id != *want_case) || (want_season && s.season != *want_season);
  });
  if (specs.empty()) throw ValidationError("no scenario matches the selection");

  const Grid grid = scale_demand(raw, calib.factor);
  const auto results = run_cases(grid, load_profiles(profiles_dir), specs);

  const fs::path root(out_dir);
  RunManifest m;
  m.tool_version = GRIDSIM_VERSION;
  m.grid_seed = raw.seed;
  m.grid_file = fs::absolute(grid_path).lexically_normal().string();
  m.calibration_file = fs::absolute(calib_path).lexically_normal().string();
  m.cases_file = fs::absolute(cases_path).lexically_normal().string();
  if (!case_filter.empty()) m.case_filter = case_filter;
  if (!season_filter.empty()) m.season_filter = season_filter;
  m.calibration_factor = calib.factor;
  m.timestamp = utc_timestamp();
  for (const auto& p : emit_case_tables(results, root / "tables")) m.tables.push_back(fs::relative(p, root).string());
  for (const auto& r : results) {
    m.scenario_ids.push_back(r.scenario_id);
    for (const auto& p : export_plot_data(r, root / "plots")) m.outputs[r.scenario_id].push_back(fs::relative(p, root).string());
  }
  write_text_file(root / "manifest.json", manifest_to_json(m));

  std::cout << case_table_csv(results);
  return 0;
}

int cmd_optimize(const std::string& sessions_path, const std::string& facility_path, bool verify, const std::string& out) {
  const auto sessions = sessions_from_csv(read_text_file(sessions_path));
  const FacilitySpec facility = facility_from_json(read_text_file(facility_path));
  const ScheduleResult r = schedule_min_peak(sessions, facility);
  if (verify) {
    // An infeasible optimum exceeds the cap by definition; everything else must hold.
    const auto report = verify_schedule(sessions, r, facility, r.feasible);
    if (!report.ok()) throw VerificationError("schedule failed verification:\n" + report.to_string());
  }
  write_text_file(out, schedule_to_csv(sessions, r));
  write_text_file(summary_path(out), schedule_summary_csv(r));
  std::cout << schedule_summary_csv(r);
  return 0;
}

int cmd_report(const std::string& in_dir, const std::string& format) {
  fs::path agg = fs::path(in_dir) / "tables" / "results.json";
  if (!fs::exists(agg)) agg = fs::path(in_dir) / "results.json";
  const auto results = results_from_json(read_text_file(agg));
  if (format == "json") {
    std::cout << results_to_json(results);
  } else {
    std::cout << case_table_csv(results);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distribution grid EV impact study"};
  app.set_version_flag("--version", GRIDSIM_VERSION);
  app.require_subcommand(1);

  std::uint64_t seed = 2020;
  std::string out, grid_path, calib_path, cases_path, case_filter, season_filter, out_dir, profiles_dir;
  std::string sessions_path, facility_path, in_dir, format = "csv";
  double target = 83.87;
  bool verify = false;

  auto* synth = app.add_subcommand("synthesize", "build the reference grid");
  synth->add_option("--seed", seed, "synthesis seed")->required();
  synth->add_option("--out", out, "grid JSON to write")->required();

  auto* calib = app.add_subcommand("calibrate", "fit the demand scale to the anchor loading");
  calib->add_option("--grid", grid_path)->required();
  calib->add_option("--out", out)->required();
  calib->add_option("--profiles", profiles_dir, "profile CSV directory (built-in shapes if omitted)");
  calib->add_option("--target", target, "anchor loading in percent")->capture_default_str();

  auto* run = app.add_subcommand("run", "simulate the scenario catalog");
  run->add_option("--grid", grid_path)->required();
  run->add_option("--calib", calib_path)->required();
  run->add_option("--cases", cases_path)->required();
  run->add_option("--case", case_filter)->check(CLI::IsMember({"I", "II", "III", "IV"}));
  run->add_option("--season", season_filter)->check(CLI::IsMember({"winter", "summer"}));
  run->add_option("--profiles", profiles_dir, "profile CSV directory (built-in shapes if omitted)");
  run->add_option("--out-dir", out_dir)->required();

  auto* opt = app.add_subcommand("optimize-pr", "min-peak schedule for one park-and-ride facility");
  opt->add_option("--sessions", sessions_path)->required();
  opt->add_option("--facility", facility_path)->required();
  opt->add_flag("--verify", verify, "check the schedule invariants before writing");
  opt->add_option("--out", out)->required();

  auto* rep = app.add_subcommand("report", "print tables from a run directory");
  rep->add_option("--in", in_dir)->required();
  rep->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorCategory::Usage);
  }

  try {
    if (*synth) return cmd_synthesize(seed, out);
    if (*calib) return cmd_calibrate(grid_path, profiles_dir, target, out);
    if (*run) return cmd_run(grid_path, calib_path, cases_path, case_filter, season_filter, profiles_dir, out_dir);
    if (*opt) return cmd_optimize(sessions_path, facility_path, verify, out);
    if (*rep) return cmd_report(in_dir, format);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return static_cast<int>(ErrorCategory::Usage);
}
