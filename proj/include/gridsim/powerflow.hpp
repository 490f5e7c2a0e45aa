#pragma once

#include <complex>
#include <span>
#include <string_view>
#include <vector>

#include "gridsim/grid.hpp"

namespace gridsim {

inline constexpr int kStepsPerDay = 96;
inline constexpr int kStepMinutes = 15;
inline constexpr double kStepHours = 0.25;

/// Net demand per bus, aligned with Grid::buses. Load is positive,
/// generation negative. The slack entry must stay zero.
struct SnapshotInjections {
  std::vector<double> p_mw;
  std::vector<double> q_mvar;

  static SnapshotInjections zeros(std::size_t n_buses) {
    return {std::vector<double>(n_buses, 0.0), std::vector<double>(n_buses, 0.0)};
  }
  bool operator==(const SnapshotInjections&) const = default;
};

struct SolverOptions {
  double tolerance_pu = 1e-6;
  int max_iterations = 50;
};

struct SnapshotSolution {
  std::vector<double> v_pu;       ///< per bus
  std::vector<double> angle_rad;  ///< per bus
  std::vector<double> branch_current_a;
  std::vector<double> branch_loading_pct;  ///< of ampacity
  std::vector<double> trafo_kva;           ///< apparent power at the HV terminal
  std::vector<double> trafo_loading_pct;   ///< of rating
  double slack_p_mw = 0.0;
  double slack_q_mvar = 0.0;
  double losses_mw = 0.0;  ///< total generation minus total load
  double max_mismatch_pu = 0.0;
  bool converged = false;
  int iterations = 0;

  bool operator==(const SnapshotSolution&) const = default;
};

struct SolutionSeries {
  std::vector<SnapshotSolution> steps;
  int step_minutes = kStepMinutes;

  bool operator==(const SolutionSeries&) const = default;
};

/// Tree view of a radial Grid prepared once for repeated sweeps.
///
/// Buses are indexed as in Grid::buses. Every non-slack bus has exactly one
/// parent edge (a branch or a transformer) leading toward the slack bus.
/// Transformers are series impedances at nominal per-unit ratio.
class RadialNetwork {
 public:
  /// Throws ValidationError when the grid has no single slack, is meshed, or
  /// leaves a bus unreachable (singular network).
  explicit RadialNetwork(const Grid& grid);

  SnapshotSolution solve(const SnapshotInjections& injections, const SolverOptions& options = {}) const;

  std::size_t bus_count() const { return parent_.size(); }
  int slack() const { return slack_; }

 private:
  enum class EdgeKind { Branch, Transformer };
  struct ParentEdge {
    EdgeKind kind;
    int index;  ///< into Grid::branches or Grid::transformers
    std::complex<double> z_pu;
  };

  double base_mva_;
  int slack_ = -1;
  std::vector<int> parent_;            ///< parent bus, -1 for the slack
  std::vector<ParentEdge> parent_edge_;  ///< meaningful for non-slack buses
  std::vector<int> order_;             ///< BFS order from the slack
  std::vector<double> current_base_a_;  ///< per bus
  std::vector<double> branch_ampacity_a_;
  std::vector<int> branch_child_;  ///< child bus of each branch
  std::vector<double> trafo_rating_kva_;
  std::vector<int> trafo_child_;
  std::vector<int> trafo_hv_;
};

SnapshotSolution solve_snapshot(const Grid& grid, const SnapshotInjections& injections,
                                const SolverOptions& options = {});

/// Solves the 96 daily snapshots, in parallel across steps. Results are in
/// step order and identical to run_quasi_dynamic_serial. Throws
/// NumericalError tagged with the first non-converged step.
SolutionSeries run_quasi_dynamic(const Grid& grid, std::span<const SnapshotInjections> series,
                                 const SolverOptions& options = {});
SolutionSeries run_quasi_dynamic(const RadialNetwork& network, std::span<const SnapshotInjections> series,
                                 const SolverOptions& options = {});

/// Single-threaded reference for the parallel driver.
SolutionSeries run_quasi_dynamic_serial(const RadialNetwork& network, std::span<const SnapshotInjections> series,
                                        const SolverOptions& options = {});

}  // namespace gridsim
