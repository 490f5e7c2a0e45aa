#include "gridsim/profiles.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gridsim/error.hpp"
#include "gridsim/grid_io.hpp"
#include "gridsim/powerflow.hpp"
#include "gridsim/text.hpp"

namespace gridsim {

std::string_view to_string(Season s) { return s == Season::Winter ? "winter" : "summer"; }

std::optional<Season> parse_season(std::string_view s) {
  if (s == "winter") return Season::Winter;
  if (s == "summer") return Season::Summer;
  return std::nullopt;
}

std::string_view to_string(ProfileClass c) {
  switch (c) {
    case ProfileClass::MvCustomer: return "mv_customer";
    case ProfileClass::LvHousehold: return "lv_household";
    case ProfileClass::Pv: return "pv";
    case ProfileClass::RotatingDg: return "rotating_dg";
    case ProfileClass::EvHousehold: return "ev_household";
    case ProfileClass::PrFacility: return "pr_facility";
  }
  return "";
}

std::optional<ProfileClass> parse_profile_class(std::string_view s) {
  for (auto c : {ProfileClass::MvCustomer, ProfileClass::LvHousehold, ProfileClass::Pv, ProfileClass::RotatingDg,
                 ProfileClass::EvHousehold, ProfileClass::PrFacility}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

double TimeSeriesProfile::peak() const {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

double TimeSeriesProfile::mean() const {
  return values.empty() ? 0.0 : std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

void check_profile(const TimeSeriesProfile& profile) {
  if (profile.values.size() != static_cast<std::size_t>(kStepsPerDay)) {
    throw ValidationError("profile '" + profile.id + "' has " + std::to_string(profile.values.size()) +
                          " samples, expected 96");
  }
  for (double v : profile.values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError("profile '" + profile.id + "' has a negative or non-finite sample");
    }
  }
}

void ProfileSet::add(TimeSeriesProfile profile) {
  check_profile(profile);
  profile.season = season_;
  std::string id = profile.id;
  profiles_.insert_or_assign(std::move(id), std::move(profile));
}

const TimeSeriesProfile* ProfileSet::find(std::string_view id) const {
  auto it = profiles_.find(id);
  return it == profiles_.end() ? nullptr : &it->second;
}

const TimeSeriesProfile& ProfileSet::at(std::string_view id) const {
  const auto* p = find(id);
  if (!p) {
    throw ValidationError("missing profile '" + std::string(id) + "' for season " + std::string(to_string(season_)));
  }
  return *p;
}

namespace {

double bump(double h, double centre, double width) {
  const double z = (h - centre) / width;
  return std::exp(-0.5 * z * z);
}

double rise(double h, double at, double softness) { return 1.0 / (1.0 + std::exp(-(h - at) / softness)); }

struct ResidentialShape {
  double night;
  double morning;
  double midday;
  double evening;
  double day_level;
};

struct IndustrialShape {
  double night;    // 22:00 to opening
  double evening;  // closing to 22:00
  double plateau;
  double lunch_dip;
  double start_h;
  double end_h;
};

struct SolarShape {
  double peak;
  double width_h;
  double sunrise;
  double sunset;
};

// Shape parameters. The absolute demand scale is fixed later by
// calibration, so only the relative form of each curve matters.
constexpr ResidentialShape kLvWinter{0.14, 0.04, 0.02, 0.16, 0.10};
constexpr ResidentialShape kLvSummer{0.13, 0.03, 0.02, 0.14, 0.09};
constexpr IndustrialShape kMvWinter{0.60, 0.45, 0.99, 0.03, 7.0, 16.0};
constexpr IndustrialShape kMvSummer{0.56, 0.42, 0.90, 0.03, 7.0, 16.0};
constexpr SolarShape kPvWinter{0.35, 1.8, 7.5, 17.0};
constexpr SolarShape kPvSummer{0.72, 2.6, 5.5, 20.5};
constexpr double kDgWinter = 0.75;
constexpr double kDgSummer = 0.65;

std::vector<double> sample(auto&& fn) {
  std::vector<double> v(kStepsPerDay);
  for (int t = 0; t < kStepsPerDay; ++t) v[static_cast<std::size_t>(t)] = std::max(0.0, fn(t * kStepHours));
  return v;
}

std::vector<double> residential(const ResidentialShape& s) {
  return sample([&](double h) {
    const double awake = rise(h, 6.5, 0.4) * (1.0 - rise(h, 23.0, 0.5));
    return s.night + s.day_level * awake + s.morning * bump(h, 8.0, 1.1) + s.midday * bump(h, 13.0, 1.6) +
           s.evening * bump(h, 19.0, 1.3);
  });
}

std::vector<double> industrial(const IndustrialShape& s) {
  return sample([&](double h) {
    const double on = rise(h, s.start_h, 0.3) * (1.0 - rise(h, s.end_h, 0.3));
    const double after = rise(h, s.end_h, 0.3) * (1.0 - rise(h, 22.0, 0.4));
    return s.night + (s.plateau - s.night) * on + (s.evening - s.night) * after - s.lunch_dip * bump(h, 12.75, 0.5);
  });
}

std::vector<double> solar(const SolarShape& s) {
  return sample([&](double h) {
    if (h < s.sunrise || h > s.sunset) return 0.0;
    const double edge = bump(s.sunrise, 12.25, s.width_h);
    return s.peak * std::max(0.0, (bump(h, 12.25, s.width_h) - edge) / (1.0 - edge));
  });
}

TimeSeriesProfile make(ProfileClass cls, Season season, std::vector<double> values) {
  return {std::string(to_string(cls)), std::move(values), season, cls};
}

}  // namespace

ProfileLibrary builtin_profile_library() {
  ProfileLibrary lib;
  lib.winter.add(make(ProfileClass::LvHousehold, Season::Winter, residential(kLvWinter)));
  lib.winter.add(make(ProfileClass::MvCustomer, Season::Winter, industrial(kMvWinter)));
  lib.winter.add(make(ProfileClass::Pv, Season::Winter, solar(kPvWinter)));
  lib.winter.add(make(ProfileClass::RotatingDg, Season::Winter, std::vector<double>(kStepsPerDay, kDgWinter)));
  lib.summer.add(make(ProfileClass::LvHousehold, Season::Summer, residential(kLvSummer)));
  lib.summer.add(make(ProfileClass::MvCustomer, Season::Summer, industrial(kMvSummer)));
  lib.summer.add(make(ProfileClass::Pv, Season::Summer, solar(kPvSummer)));
  lib.summer.add(make(ProfileClass::RotatingDg, Season::Summer, std::vector<double>(kStepsPerDay, kDgSummer)));
  return lib;
}

std::string profile_to_csv(const TimeSeriesProfile& profile) {
  std::string out = "step,value\n";
  for (std::size_t t = 0; t < profile.values.size(); ++t) {
    out += std::to_string(t) + "," + format_number(profile.values[t]) + "\n";
  }
  return out;
}

TimeSeriesProfile profile_from_csv(std::string_view text, std::string id, Season season, ProfileClass cls) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw ParseError("profile '" + id + "': empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "step,value") throw ParseError("profile '" + id + "': header must be 'step,value'");
  TimeSeriesProfile p{std::move(id), {}, season, cls};
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("profile '" + p.id + "' line " + std::to_string(row) + ": expected 2 columns");
    int step = -1;
    double value = 0.0;
    const char* b = line.data();
    auto r1 = std::from_chars(b, b + comma, step);
    auto r2 = std::from_chars(b + comma + 1, b + line.size(), value);
    if (r1.ec != std::errc{} || r2.ec != std::errc{} || r2.ptr != b + line.size()) {
      throw ParseError("profile '" + p.id + "' line " + std::to_string(row) + ": malformed number");
    }
    if (step != static_cast<int>(p.values.size())) {
      throw ParseError("profile '" + p.id + "' line " + std::to_string(row) + ": steps must run 0..95 in order");
    }
    p.values.push_back(value);
  }
  check_profile(p);
  return p;
}

void write_profile_library(const ProfileLibrary& library, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const ProfileSet* set : {&library.winter, &library.summer}) {
    for (const auto& [id, p] : set->all()) {
      write_text_file(dir / (id + "_" + std::string(to_string(set->season())) + ".csv"), profile_to_csv(p));
    }
  }
}

ProfileLibrary read_profile_library(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("profile directory '" + dir.string() + "' not found");
  ProfileLibrary lib;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    const std::string stem = path.stem().string();
    const auto us = stem.rfind('_');
    if (us == std::string::npos) continue;
    const auto season = parse_season(stem.substr(us + 1));
    if (!season) continue;
    std::string id = stem.substr(0, us);
    const auto cls = parse_profile_class(id).value_or(ProfileClass::MvCustomer);
    lib.for_season(*season).add(profile_from_csv(read_text_file(path), id, *season, cls));
  }
  return lib;
}

double GrowthModel::demand_multiplier(int year) const {
  if (year < base_year) {
    throw ValidationError("year " + std::to_string(year) + " precedes the growth base year " +
                          std::to_string(base_year));
  }
  if (auto it = factor_table.find(year); it != factor_table.end()) return it->second;
  return 1.0 + customer_growth_per_year * static_cast<double>(year - base_year);
}

TimeSeriesProfile scale_for_year(const TimeSeriesProfile& profile, const GrowthModel& growth, int year) {
  const double k = growth.demand_multiplier(year);
  TimeSeriesProfile out = profile;
  for (auto& v : out.values) v *= k;
  return out;
}

}  // namespace gridsim
