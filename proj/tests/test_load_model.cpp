#include <cmath>
#include <numeric>

#include "doctest.h"
#include "gridsim/error.hpp"
#include "gridsim/load_model.hpp"
#include "gridsim/profiles.hpp"
#include "gridsim/scenario.hpp"
#include "gridsim/synth.hpp"

using namespace gridsim;

namespace {

double integral_kwh(const TimeSeriesProfile& p) {
  return std::accumulate(p.values.begin(), p.values.end(), 0.0) * kStepHours;
}

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

GrowthModel case_ii_growth() {
  GrowthModel m;
  m.customer_growth_per_year = 0.013;
  m.factor_table = {{2023, 1.049}, {2026, 1.078}};
  return m;
}

}  // namespace

TEST_SUITE("load-model") {

TEST_CASE("growth scaling") {
  TimeSeriesProfile p{"x", std::vector<double>(96, 0.5), Season::Winter, ProfileClass::LvHousehold};
  const GrowthModel m = case_ii_growth();
  CHECK(scale_for_year(p, m, 2020) == p);
  CHECK(scale_for_year(p, m, 2023).values[0] == doctest::Approx(0.5245).epsilon(1e-12));
  CHECK(scale_for_year(p, m, 2026).values[0] == doctest::Approx(0.539).epsilon(1e-12));
  CHECK_THROWS_AS(scale_for_year(p, m, 2019), ValidationError);

  GrowthModel linear;
  linear.customer_growth_per_year = 0.009;
  double last = 0.0;
  for (int y = 2020; y <= 2035; ++y) {
    const double k = linear.demand_multiplier(y);
    CHECK(k > last);
    last = k;
  }
  CHECK(linear.demand_multiplier(2020) == 1.0);
}

TEST_CASE("household EV fleet") {
  EvFleetSpec fleet;
  SUBCASE("no EVs, no load") {
    fleet.penetration = 0.0;
    const auto p = build_household_ev_profile(fleet, 10000);
    for (double v : p.values) CHECK(v == 0.0);
  }
  SUBCASE("count and energy") {
    fleet.penetration = 0.35;
    CHECK(ev_count(fleet, 10000) == 7000);
    const auto p = build_household_ev_profile(fleet, 10000);
    CHECK(std::abs(integral_kwh(p) - 7000 * 6.6) < 1e-6);
    for (double v : p.values) CHECK(v >= 0.0);
    // Starts cluster around 19:00 and each charge lasts two hours.
    const int peak = argmax(p.values);
    CHECK(peak >= 76);
    CHECK(peak <= 84);
  }
  SUBCASE("wrapping past midnight keeps the energy") {
    fleet.penetration = 0.2;
    fleet.start_mean_step = 94.0;
    fleet.daily_energy_kwh = 13.2;
    const auto p = build_household_ev_profile(fleet, 3000);
    CHECK(std::abs(integral_kwh(p) - ev_count(fleet, 3000) * 13.2) < 1e-6);
    CHECK(p.values[2] > 0.0);
  }
  SUBCASE("seeded") {
    fleet.penetration = 0.45;
    CHECK(build_household_ev_profile(fleet, 500) == build_household_ev_profile(fleet, 500));
    EvFleetSpec other = fleet;
    other.seed = 2;
    CHECK(build_household_ev_profile(fleet, 500) != build_household_ev_profile(other, 500));
  }
  SUBCASE("parameter checks") {
    fleet.penetration = 1.2;
    CHECK_THROWS_AS(build_household_ev_profile(fleet, 10), ValidationError);
    fleet.penetration = 0.5;
    fleet.daily_energy_kwh = 100.0;
    CHECK_THROWS_AS(build_household_ev_profile(fleet, 10), ValidationError);
  }
}

TEST_CASE("bus injections") {
  const Grid g = synthesize_reference_grid(2020);
  const ProfileLibrary lib = builtin_profile_library();

  SUBCASE("all-zero profiles and no EV give zero injections") {
    ProfileSet zero(Season::Winter);
    for (const auto& [id, p] : lib.winter.all()) {
      auto z = p;
      std::fill(z.values.begin(), z.values.end(), 0.0);
      zero.add(z);
    }
    DayInputs in;
    in.grid = &g;
    in.profiles = &zero;
    const auto inj = compose_bus_injections(in, 50);
    for (double p : inj.p_mw) CHECK(p == 0.0);
    for (double q : inj.q_mvar) CHECK(q == 0.0);
  }

  SUBCASE("EV share follows households and is conserved") {
    for (double total : {0.0, 1.0, 12345.678}) {
      const auto share = apportion_household_ev(g, total);
      double sum = 0.0;
      for (std::size_t i = 0; i < g.loads.size(); ++i) {
        sum += share[i];
        if (g.loads[i].load_class == LoadClass::LvAggregate) {
          CHECK(share[i] == doctest::Approx(total * g.loads[i].n_households / 10000.0));
        } else {
          CHECK(share[i] == 0.0);
        }
      }
      CHECK(std::abs(sum - total) <= 1e-9 * std::max(1.0, total));
    }
  }

  SUBCASE("an aggregate of 100 of 10,000 households takes 1 percent") {
    Grid h;
    h.buses.push_back({"S", 15.0, BusKind::Slack, std::nullopt});
    h.buses.push_back({"A", 0.4, BusKind::Pq, "F1"});
    h.buses.push_back({"B", 0.4, BusKind::Pq, "F1"});
    h.loads.push_back({"LA", "A", LoadClass::LvAggregate, 300.0, 100, 0.9, "lv_household"});
    h.loads.push_back({"LB", "B", LoadClass::LvAggregate, 29700.0, 9900, 0.9, "lv_household"});
    const auto share = apportion_household_ev(h, 5000.0);
    CHECK(share[0] == doctest::Approx(50.0));
  }

  SUBCASE("composition terms") {
    EvFleetSpec fleet;
    fleet.penetration = 0.45;
    const auto ev = build_household_ev_profile(fleet, 10000);
    TimeSeriesProfile pr{"pr", std::vector<double>(96, 750.0), Season::Winter, ProfileClass::PrFacility};
    const std::vector<FacilityLoad> fac{{reference::trunk_bus_id(2, 10), pr}};
    DayInputs in;
    in.grid = &g;
    in.profiles = &lib.winter;
    in.demand_multiplier = 1.078;
    in.ev_household = &ev;
    in.facilities = fac;
    const int step = 78;
    const auto inj = compose_bus_injections(in, step);

    // Independent recomputation of the total active and reactive demand.
    double p_kw = 0.0, q_kvar = 0.0;
    for (const auto& l : g.loads) {
      const double k = l.load_class == LoadClass::LvAggregate ? 1.078 : 1.0;
      const double p = l.installed_kw * lib.winter.at(l.profile_ref).values[step] * k;
      p_kw += p;
      q_kvar += p * std::tan(std::acos(l.power_factor));
    }
    for (const auto& gen : g.generators) {
      const double p = gen.rated_kva * gen.power_factor * lib.winter.at(gen.profile_ref).values[step];
      p_kw -= p;
      q_kvar -= p * std::tan(std::acos(gen.power_factor));
    }
    p_kw += ev.values[step] + 750.0;
    CHECK(std::accumulate(inj.p_mw.begin(), inj.p_mw.end(), 0.0) * 1000.0 == doctest::Approx(p_kw).epsilon(1e-12));
    CHECK(std::accumulate(inj.q_mvar.begin(), inj.q_mvar.end(), 0.0) * 1000.0 ==
          doctest::Approx(q_kvar).epsilon(1e-12));
    CHECK(inj.p_mw[static_cast<std::size_t>(g.slack_index())] == 0.0);
  }

  SUBCASE("missing profile reference") {
    ProfileSet partial(Season::Winter);
    partial.add(lib.winter.at("mv_customer"));
    DayInputs in;
    in.grid = &g;
    in.profiles = &partial;
    CHECK_THROWS_AS(compose_bus_injections(in, 0), ValidationError);
  }

  SUBCASE("seasons swap profiles, never topology") {
    DayInputs w;
    w.grid = &g;
    w.profiles = &lib.winter;
    DayInputs s = w;
    s.profiles = &lib.summer;
    const auto a = compose_bus_injections(w, 48);
    const auto b = compose_bus_injections(s, 48);
    CHECK(a.p_mw.size() == b.p_mw.size());
    CHECK(a != b);
    CHECK(&lib.winter != &lib.summer);
  }
}

TEST_CASE("Case III facilities install 9.9 MW") {
  const auto fac = default_pr_facilities();
  REQUIRE(fac.size() == 3);
  double installed = 0.0;
  for (const auto& f : fac) installed += f.n_chargers * f.charger_kw;
  CHECK(installed == doctest::Approx(9900.0));
}

TEST_CASE("profile library shapes") {
  const ProfileLibrary lib = builtin_profile_library();
  for (Season s : {Season::Winter, Season::Summer}) {
    const auto& set = lib.for_season(s);
    for (const char* id : {"lv_household", "mv_customer", "pv", "rotating_dg"}) {
      CAPTURE(id);
      const auto& p = set.at(id);
      CHECK(p.values.size() == 96);
      CHECK_NOTHROW(check_profile(p));
      CHECK(p.season == s);
    }
    CHECK(argmax(set.at("lv_household").values) == 76);
    const auto& pv = set.at("pv").values;
    CHECK(pv[0] == 0.0);
    CHECK(pv[95] == 0.0);
    CHECK(std::abs(argmax(pv) - 48) <= 1);
    const auto& dg = set.at("rotating_dg").values;
    CHECK(*std::max_element(dg.begin(), dg.end()) == *std::min_element(dg.begin(), dg.end()));
    // Industrial plateau: working hours well above the night level.
    const auto& mv = set.at("mv_customer").values;
    CHECK(mv[40] > 1.3 * mv[8]);
  }
  CHECK(lib.winter.at("lv_household") != lib.summer.at("lv_household"));
}

TEST_CASE("profile CSV round trip and checks") {
  const auto p = builtin_profile_library().winter.at("lv_household");
  const auto back = profile_from_csv(profile_to_csv(p), p.id, p.season, p.profile_class);
  CHECK(back == p);
  CHECK_THROWS_AS(profile_from_csv("step,value\n0,1\n", "x", Season::Winter, ProfileClass::Pv), Error);
  TimeSeriesProfile neg{"n", std::vector<double>(96, 0.1), Season::Summer, ProfileClass::Pv};
  neg.values[3] = -0.01;
  CHECK_THROWS_AS(check_profile(neg), ValidationError);
}

}  // TEST_SUITE
