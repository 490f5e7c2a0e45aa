#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "gridsim/error.hpp"
#include "gridsim/grid_io.hpp"
#include "gridsim/report.hpp"
#include "gridsim/text.hpp"
#include "support/reference_study.hpp"

using namespace gridsim;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("gridsim-test-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<CaseResult> of_case(CaseId c) {
  std::vector<CaseResult> out;
  for (const auto& r : support::reference_study().results) {
    if (r.case_id == c) out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("number formatting") {
  CHECK(format_significant(83.871, 4) == "83.87");
  CHECK(format_significant(1.0, 4) == "1.000");
  CHECK(format_significant(0.00123456, 4) == "0.001235");
  for (double v : {0.1, 1.0 / 3.0, 83.87, 1e-17, 12345.678}) CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("case tables") {
  const auto case_i = of_case(CaseId::I);
  const auto rows = lines(case_table_csv(case_i));
  REQUIRE(rows.size() == 9);
  CHECK(rows[0] == "scenario,season,year,penetration,peak_mw,par,max_voltage_dev_pct,max_trafo_loading_pct");
  int winter = 0, summer = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto cells = split_csv_line(rows[i]);
    REQUIRE(cells.size() == 8);
    winter += cells[1] == "winter";
    summer += cells[1] == "summer";
    CHECK(cells[2] == "2020");
  }
  CHECK(winter == 4);
  CHECK(summer == 4);
  const auto anchor = split_csv_line(rows[4]);
  CHECK(anchor[0] == "I-winter-p45");
  CHECK(anchor[7] == format_significant(support::reference_study().result("I-winter-p45").max_trafo_loading_percent, 4));
}

TEST_CASE("emitting tables") {
  const auto& st = support::reference_study();
  SUBCASE("empty set writes nothing") {
    TempDir tmp;
    const fs::path dest = tmp.path / "out";
    CHECK_THROWS_AS(emit_case_tables({}, dest), ValidationError);
    CHECK_FALSE(fs::exists(dest));
  }
  SUBCASE("one file per case plus the aggregate") {
    TempDir tmp;
    const auto files = emit_case_tables(st.results, tmp.path);
    CHECK(files.size() == 5);
    for (const char* name : {"case_I.csv", "case_II.csv", "case_III.csv", "case_IV.csv", "results.json"}) {
      CHECK(fs::exists(tmp.path / name));
    }
    const auto back = results_from_json(read_text_file(tmp.path / "results.json"));
    REQUIRE(back.size() == st.results.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      auto expected = st.results[i];
      CHECK(back[i].same_values(expected));
    }
  }
  SUBCASE("unwritable destination") {
    TempDir tmp;
    const fs::path blocker = tmp.path / "file";
    write_text_file(blocker, "x");
    CHECK_THROWS_AS(emit_case_tables(st.results, blocker / "sub"), IoError);
  }
}

TEST_CASE("plot data") {
  const auto& st = support::reference_study();
  const auto& r = st.result("III-winter-unopt");
  const auto loading = lines(loading_csv(r));
  CHECK(loading.size() == 97);
  CHECK(loading[0] == "step,primary_loading_pct,primary_p_mw");
  CHECK(lines(voltage_csv(r)).size() == 97);

  const auto fac = lines(facility_csv(r));
  REQUIRE(fac.size() == 97);
  CHECK(fac[0] == "step,unoptimized_kw,optimized_kw");
  double max_unopt = 0.0, max_opt = 0.0;
  for (std::size_t i = 1; i < fac.size(); ++i) {
    const auto c = split_csv_line(fac[i]);
    max_unopt = std::max(max_unopt, std::stod(c[1]));
    max_opt = std::max(max_opt, std::stod(c[2]));
  }
  CHECK(max_opt < max_unopt);

  TempDir tmp;
  CHECK(export_plot_data(r, tmp.path).size() == 3);
  CHECK(export_plot_data(st.result("I-winter-p45"), tmp.path).size() == 2);
  CHECK(fs::exists(tmp.path / "III-winter-unopt_facility.csv"));
  CHECK_FALSE(fs::exists(tmp.path / "I-winter-p45_facility.csv"));
}

TEST_CASE("manifest round trip") {
  RunManifest m;
  m.tool_version = "1.0.0";
  m.grid_seed = 2020;
  m.grid_file = "/x/grid.json";
  m.calibration_file = "/x/calib.json";
  m.cases_file = "/x/cases.json";
  m.season_filter = "winter";
  m.calibration_factor = 0.9071234567891;
  m.scenario_ids = {"I-winter-p00"};
  m.timestamp = utc_timestamp();
  m.outputs["I-winter-p00"] = {"plots/I-winter-p00_loading.csv"};
  m.tables = {"tables/case_I.csv"};
  CHECK(manifest_from_json(manifest_to_json(m)) == m);
  CHECK(m.timestamp.size() == 20);
  CHECK(m.timestamp.back() == 'Z');
}

}  // TEST_SUITE
