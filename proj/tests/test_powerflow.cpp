#include <cmath>

#include "doctest.h"
#include "gridsim/error.hpp"
#include "gridsim/load_model.hpp"
#include "gridsim/powerflow.hpp"
#include "gridsim/profiles.hpp"
#include "gridsim/synth.hpp"
#include "oracles/zbus_oracle.hpp"
#include "support/random_grid.hpp"

using namespace gridsim;

namespace {

SnapshotInjections single_load(std::size_t n, std::size_t bus, double p, double q) {
  auto inj = SnapshotInjections::zeros(n);
  inj.p_mw[bus] = p;
  inj.q_mvar[bus] = q;
  return inj;
}

double total_injection(const SnapshotInjections& inj) {
  double s = 0.0;
  for (double p : inj.p_mw) s += p;
  return s;
}

}  // namespace

TEST_SUITE("powerflow") {

TEST_CASE("zero injections give a flat, lossless solution") {
  const Grid g = synthesize_reference_grid(3);
  const auto sol = solve_snapshot(g, SnapshotInjections::zeros(g.buses.size()));
  CHECK(sol.converged);
  for (double v : sol.v_pu) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  for (double a : sol.branch_current_a) CHECK(a == doctest::Approx(0.0));
  for (double s : sol.trafo_kva) CHECK(s == doctest::Approx(0.0));
  CHECK(sol.losses_mw == doctest::Approx(0.0));
}

TEST_CASE("two-bus closed form") {
  // 15 kV slack, 1 MW at unity power factor through 0.2 + j0.1 ohm.
  const double expected = oracle::two_bus_voltage_kv(15.0, 0.2, 0.1, 1.0, 0.0) / 15.0;
  // Value worked out by hand from the quadratic, frozen so a broken oracle
  // cannot silently agree with a broken solver.
  CHECK(expected == doctest::Approx(0.9991102205502472).epsilon(1e-15));

  const Grid g = support::two_bus_grid(15.0, 0.2, 0.1);
  SolverOptions tight;
  tight.tolerance_pu = 1e-12;
  const auto sol = solve_snapshot(g, single_load(2, 1, 1.0, 0.0), tight);
  REQUIRE(sol.converged);
  CHECK(std::abs(sol.v_pu[1] - expected) < 1e-9);

  SUBCASE("inductive loads at other voltages") {
    for (auto [kv, r, x, p, q] : {std::tuple{15.0, 1.5, 0.8, 3.0, 1.2}, std::tuple{0.4, 0.05, 0.02, 0.1, 0.04},
                                   std::tuple{132.0, 4.0, 12.0, 30.0, 10.0}}) {
      const auto s = solve_snapshot(support::two_bus_grid(kv, r, x), single_load(2, 1, p, q), tight);
      REQUIRE(s.converged);
      CHECK(std::abs(s.v_pu[1] - oracle::two_bus_voltage_kv(kv, r, x, p, q) / kv) < 1e-9);
    }
  }
}

TEST_CASE("random radial grids agree with the nodal fixed-point reference") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    CAPTURE(seed);
    const auto rc = support::random_radial_case(seed);
    const auto sol = solve_snapshot(rc.grid, rc.injections);
    REQUIRE(sol.converged);
    const auto ref = oracle::zbus_fixed_point(rc.grid, rc.injections);
    for (std::size_t k = 0; k < ref.size(); ++k) {
      CHECK(std::abs(sol.v_pu[k] - std::abs(ref[k])) < 1e-6);
      CHECK(std::abs(sol.angle_rad[k] - std::arg(ref[k])) < 1e-6);
    }
  }
}

TEST_CASE("power balance and non-negative losses") {
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    CAPTURE(seed);
    const auto rc = support::random_radial_case(seed);
    const SolverOptions opt;
    const auto sol = solve_snapshot(rc.grid, rc.injections, opt);
    REQUIRE(sol.converged);
    CHECK(sol.losses_mw >= 0.0);
    // Slack supply minus net demand minus losses, on the grid's base.
    const double residual = sol.slack_p_mw - total_injection(rc.injections) - sol.losses_mw;
    CHECK(std::abs(residual) / rc.grid.base_mva < 10 * opt.tolerance_pu);
    // Losses computed from branch currents must match the balance.
    double i2r = 0.0;
    for (std::size_t b = 0; b < rc.grid.branches.size(); ++b) {
      const auto& br = rc.grid.branches[b];
      const double amps = sol.branch_current_a[b];
      i2r += 3.0 * amps * amps * br.r_ohm_per_km * br.length_km / 1e6;
    }
    if (rc.grid.transformers.empty()) CHECK(sol.losses_mw == doctest::Approx(i2r).epsilon(1e-4));
  }
}

TEST_CASE("load-bus voltage falls strictly with load") {
  const auto rc = support::random_radial_case(5, 8);
  const std::size_t leaf = rc.grid.buses.size() - 1;
  double last = 2.0;
  for (double p = 0.0; p <= 6.0; p += 0.5) {
    const auto sol = solve_snapshot(rc.grid, single_load(rc.grid.buses.size(), leaf, p, 0.3 * p));
    REQUIRE(sol.converged);
    if (p > 0.0) CHECK(sol.v_pu[leaf] < last);
    last = sol.v_pu[leaf];
  }
}

TEST_CASE("loadings follow their definitions") {
  const auto rc = support::random_radial_case(9);
  const Grid& g = rc.grid;
  const auto sol = solve_snapshot(rc.grid, rc.injections);
  for (std::size_t b = 0; b < g.branches.size(); ++b) {
    CHECK(sol.branch_loading_pct[b] == doctest::Approx(sol.branch_current_a[b] / g.branches[b].ampacity_a * 100));
  }
  for (std::size_t t = 0; t < g.transformers.size(); ++t) {
    CHECK(sol.trafo_loading_pct[t] == doctest::Approx(sol.trafo_kva[t] / g.transformers[t].rating_kva * 100));
  }
  CHECK(sol.v_pu[static_cast<std::size_t>(g.slack_index())] == 1.0);
  CHECK(sol.angle_rad[static_cast<std::size_t>(g.slack_index())] == 0.0);
}

TEST_CASE("solver errors") {
  const Grid g = support::two_bus_grid(15.0, 0.2, 0.1);
  SUBCASE("non-convergence is reported, not thrown") {
    SolverOptions opt;
    opt.max_iterations = 1;
    const auto sol = solve_snapshot(g, single_load(2, 1, 5.0, 1.0), opt);
    CHECK_FALSE(sol.converged);
    CHECK(sol.iterations == 1);
  }
  SUBCASE("isolated bus") {
    Grid h = g;
    h.buses.push_back({"X", 15.0, BusKind::Pq, "F2"});
    CHECK_THROWS_AS(solve_snapshot(h, SnapshotInjections::zeros(3)), ValidationError);
  }
  SUBCASE("slack injection") {
    CHECK_THROWS_AS(solve_snapshot(g, single_load(2, 0, 1.0, 0.0)), ValidationError);
  }
  SUBCASE("voltage collapse does not converge") {
    const auto sol = solve_snapshot(g, single_load(2, 1, 600.0, 0.0));
    CHECK_FALSE(sol.converged);
  }
}

TEST_CASE("quasi-dynamic driver") {
  const Grid g = synthesize_reference_grid(11);
  const RadialNetwork net(g);

  SUBCASE("zero and constant series") {
    const std::vector<SnapshotInjections> zeros(kStepsPerDay, SnapshotInjections::zeros(g.buses.size()));
    const auto flat = run_quasi_dynamic(net, zeros);
    REQUIRE(flat.steps.size() == 96);
    CHECK(flat.step_minutes == 15);
    for (const auto& s : flat.steps) {
      for (double v : s.v_pu) CHECK(v == doctest::Approx(1.0));
    }

    const ProfileLibrary lib = builtin_profile_library();
    DayInputs in;
    in.grid = &g;
    in.profiles = &lib.winter;
    const auto one = compose_bus_injections(in, 40);
    const std::vector<SnapshotInjections> same(kStepsPerDay, one);
    const auto series = run_quasi_dynamic(net, same);
    for (const auto& s : series.steps) CHECK(s == series.steps.front());
    CHECK(series.steps.front() == net.solve(one));
  }

  SUBCASE("parallel and serial drivers agree exactly, element by element") {
    const ProfileLibrary lib = builtin_profile_library();
    EvFleetSpec fleet;
    fleet.penetration = 0.45;
    const auto ev = build_household_ev_profile(fleet, 10000);
    DayInputs in;
    in.grid = &g;
    in.profiles = &lib.winter;
    in.ev_household = &ev;
    const auto day = compose_day(in);
    const auto par = run_quasi_dynamic(net, day);
    const auto ser = run_quasi_dynamic_serial(net, day);
    CHECK(par == ser);
    for (int t = 0; t < kStepsPerDay; ++t) CHECK(par.steps[static_cast<std::size_t>(t)] == net.solve(day[static_cast<std::size_t>(t)]));
  }

  SUBCASE("no-EV winter day keeps MV voltages within 10 percent") {
    const ProfileLibrary lib = builtin_profile_library();
    DayInputs in;
    in.grid = &g;
    in.profiles = &lib.winter;
    const auto series = run_quasi_dynamic(net, compose_day(in));
    for (const auto& s : series.steps) {
      REQUIRE(s.converged);
      for (std::size_t k = 0; k < g.buses.size(); ++k) {
        if (g.buses[k].nominal_kv != 15.0) continue;
        CHECK(s.v_pu[k] >= 0.9);
        CHECK(s.v_pu[k] <= 1.1);
      }
    }
  }

  SUBCASE("non-convergence carries the step index") {
    std::vector<SnapshotInjections> day(kStepsPerDay, SnapshotInjections::zeros(g.buses.size()));
    day[37].p_mw[static_cast<std::size_t>(g.bus_index("MV-BB"))] = 5000.0;
    try {
      (void)run_quasi_dynamic(net, day);
      FAIL("expected a numerical error");
    } catch (const NumericalError& e) {
      CHECK(e.step() == 37);
    }
  }
}

}  // TEST_SUITE
