#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gridsim {

enum class Season { Winter, Summer };
enum class ProfileClass { MvCustomer, LvHousehold, Pv, RotatingDg, EvHousehold, PrFacility };

std::string_view to_string(Season s);
std::optional<Season> parse_season(std::string_view s);
std::string_view to_string(ProfileClass c);
std::optional<ProfileClass> parse_profile_class(std::string_view s);

/// 96 quarter-hour samples. Library shapes are per-unit of installed or rated
/// power; composed EV profiles carry absolute kW.
struct TimeSeriesProfile {
  std::string id;
  std::vector<double> values;
  Season season = Season::Winter;
  ProfileClass profile_class = ProfileClass::MvCustomer;

  bool operator==(const TimeSeriesProfile&) const = default;
  double peak() const;
  double mean() const;
};

/// Throws ValidationError unless the profile has 96 finite non-negative samples.
void check_profile(const TimeSeriesProfile& profile);

/// Profiles of one season keyed by id.
class ProfileSet {
 public:
  ProfileSet() = default;
  explicit ProfileSet(Season season) : season_(season) {}

  Season season() const { return season_; }
  void add(TimeSeriesProfile profile);
  const TimeSeriesProfile* find(std::string_view id) const;
  /// Throws ValidationError naming the id when absent.
  const TimeSeriesProfile& at(std::string_view id) const;
  const std::map<std::string, TimeSeriesProfile, std::less<>>& all() const { return profiles_; }

 private:
  Season season_ = Season::Winter;
  std::map<std::string, TimeSeriesProfile, std::less<>> profiles_;
};

/// Winter and summer profile sets.
struct ProfileLibrary {
  ProfileSet winter{Season::Winter};
  ProfileSet summer{Season::Summer};

  const ProfileSet& for_season(Season s) const { return s == Season::Winter ? winter : summer; }
  ProfileSet& for_season(Season s) { return s == Season::Winter ? winter : summer; }
};

/// Parameterized synthetic shapes: residential double hump peaking at 19:00,
/// industrial daytime plateau, midday PV bell, flat rotating DG.
ProfileLibrary builtin_profile_library();

/// `step,value` CSV with 96 data rows.
std::string profile_to_csv(const TimeSeriesProfile& profile);
TimeSeriesProfile profile_from_csv(std::string_view text, std::string id, Season season, ProfileClass cls);

/// Files are named `<id>_<season>.csv`; the id doubles as the class name.
void write_profile_library(const ProfileLibrary& library, const std::filesystem::path& dir);
ProfileLibrary read_profile_library(const std::filesystem::path& dir);

/// Demand multiplier by study year: linear growth from the base year unless
/// an explicit year table overrides it.
struct GrowthModel {
  int base_year = 2020;
  double customer_growth_per_year = 0.0;
  std::map<int, double> factor_table;

  /// Throws ValidationError for years before base_year.
  double demand_multiplier(int year) const;
};

TimeSeriesProfile scale_for_year(const TimeSeriesProfile& profile, const GrowthModel& growth, int year);

}  // namespace gridsim
