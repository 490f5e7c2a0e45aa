// Times the OpenMP quasi-dynamic driver against the serial reference on the
// reference grid (Case I winter, 45% penetration).
//
//   bench_quasi_dynamic [repetitions]

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "gridsim/load_model.hpp"
#include "gridsim/powerflow.hpp"
#include "gridsim/profiles.hpp"
#include "gridsim/synth.hpp"

using namespace gridsim;
using Clock = std::chrono::steady_clock;

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::max(1, std::atoi(argv[1])) : 20;

  const Grid grid = synthesize_reference_grid(2020);
  const ProfileLibrary lib = builtin_profile_library();
  int households = 0;
  for (const auto& l : grid.loads) households += l.n_households;
  EvFleetSpec fleet;
  fleet.penetration = 0.45;
  const auto ev = build_household_ev_profile(fleet, households);

  DayInputs in;
  in.grid = &grid;
  in.profiles = &lib.winter;
  in.ev_household = &ev;
  const auto day = compose_day(in);
  const RadialNetwork net(grid);

  // Warm up and check both drivers agree before timing.
  const auto par = run_quasi_dynamic(net, day);
  const auto ser = run_quasi_dynamic_serial(net, day);
  if (!(par == ser)) {
    std::fprintf(stderr, "parallel and serial results differ\n");
    return 1;
  }

  auto time = [&](auto&& fn) {
    const auto t0 = Clock::now();
    for (int r = 0; r < reps; ++r) fn();
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / reps;
  };
  const double t_ser = time([&] { (void)run_quasi_dynamic_serial(net, day); });
  const double t_par = time([&] { (void)run_quasi_dynamic(net, day); });

  std::printf("buses %zu, steps %d, threads %d, repetitions %d\n", net.bus_count(), kStepsPerDay,
              omp_get_max_threads(), reps);
  std::printf("serial   %8.3f ms/day\n", t_ser);
  std::printf("parallel %8.3f ms/day\n", t_par);
  std::printf("speedup  %8.2fx\n", t_ser / t_par);
  return 0;
}
