#include "gridsim/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "gridsim/error.hpp"

namespace gridsim {

using cd = std::complex<double>;

RadialNetwork::RadialNetwork(const Grid& grid) : base_mva_(grid.base_mva) {
  const std::size_t n = grid.buses.size();
  int slack_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (grid.buses[i].kind == BusKind::Slack) {
      slack_ = static_cast<int>(i);
      ++slack_count;
    }
  }
  if (slack_count != 1) throw ValidationError("power flow needs exactly one slack bus");
  if (!(base_mva_ > 0.0)) throw ValidationError("base_mva must be positive");

  const auto index = bus_index_map(grid);
  auto at = [&](const std::string& id) {
    auto it = index.find(id);
    if (it == index.end()) throw ValidationError("unresolved bus reference '" + id + "'");
    return it->second;
  };

  struct Adj {
    int to;
    ParentEdge edge;
  };
  std::vector<std::vector<Adj>> adj(n);
  for (std::size_t k = 0; k < grid.branches.size(); ++k) {
    const auto& br = grid.branches[k];
    const int a = at(br.from_bus);
    const int b = at(br.to_bus);
    const double kv = grid.buses[static_cast<std::size_t>(a)].nominal_kv;
    const double z_base = kv * kv / base_mva_;
    const cd z{br.r_ohm_per_km * br.length_km / z_base, br.x_ohm_per_km * br.length_km / z_base};
    const ParentEdge e{EdgeKind::Branch, static_cast<int>(k), z};
    adj[static_cast<std::size_t>(a)].push_back({b, e});
    adj[static_cast<std::size_t>(b)].push_back({a, e});
  }
  for (std::size_t k = 0; k < grid.transformers.size(); ++k) {
    const auto& tr = grid.transformers[k];
    const int a = at(tr.hv_bus);
    const int b = at(tr.lv_bus);
    // Short-circuit impedance on the unit's own rating, moved to system base.
    const double z_own = tr.uk_percent / 100.0;
    const double r_own = tr.load_loss_kw / tr.rating_kva;
    const double x_own = std::sqrt(std::max(0.0, z_own * z_own - r_own * r_own));
    const double scale = base_mva_ * 1000.0 / tr.rating_kva;
    const ParentEdge e{EdgeKind::Transformer, static_cast<int>(k), cd{r_own * scale, x_own * scale}};
    adj[static_cast<std::size_t>(a)].push_back({b, e});
    adj[static_cast<std::size_t>(b)].push_back({a, e});
  }

  parent_.assign(n, -2);
  parent_edge_.assign(n, ParentEdge{EdgeKind::Branch, -1, cd{}});
  order_.reserve(n);
  parent_[static_cast<std::size_t>(slack_)] = -1;
  order_.push_back(slack_);
  for (std::size_t head = 0; head < order_.size(); ++head) {
    const int u = order_[head];
    for (const auto& [v, edge] : adj[static_cast<std::size_t>(u)]) {
      auto& pv = parent_[static_cast<std::size_t>(v)];
      if (pv == -2) {
        pv = u;
        parent_edge_[static_cast<std::size_t>(v)] = edge;
        order_.push_back(v);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (parent_[i] == -2) {
      throw ValidationError("singular network: bus '" + grid.buses[i].id + "' is isolated from the slack");
    }
  }
  if (grid.branches.size() + grid.transformers.size() != n - 1) {
    throw ValidationError("network is meshed; the sweep solver needs a radial network");
  }

  current_base_a_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    current_base_a_[i] = base_mva_ * 1000.0 / (std::sqrt(3.0) * grid.buses[i].nominal_kv);
  }
  branch_ampacity_a_.resize(grid.branches.size());
  branch_child_.assign(grid.branches.size(), -1);
  for (std::size_t k = 0; k < grid.branches.size(); ++k) branch_ampacity_a_[k] = grid.branches[k].ampacity_a;
  trafo_rating_kva_.resize(grid.transformers.size());
  trafo_child_.assign(grid.transformers.size(), -1);
  trafo_hv_.resize(grid.transformers.size());
  for (std::size_t k = 0; k < grid.transformers.size(); ++k) {
    trafo_rating_kva_[k] = grid.transformers[k].rating_kva;
    trafo_hv_[k] = at(grid.transformers[k].hv_bus);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<int>(i) == slack_) continue;
    const auto& e = parent_edge_[i];
    auto& child = e.kind == EdgeKind::Branch ? branch_child_ : trafo_child_;
    child[static_cast<std::size_t>(e.index)] = static_cast<int>(i);
  }
}

SnapshotSolution RadialNetwork::solve(const SnapshotInjections& inj, const SolverOptions& options) const {
  const std::size_t n = parent_.size();
  if (inj.p_mw.size() != n || inj.q_mvar.size() != n) {
    throw ValidationError("injection vectors do not match the bus count");
  }
  const auto s = static_cast<std::size_t>(slack_);
  if (inj.p_mw[s] != 0.0 || inj.q_mvar[s] != 0.0) {
    throw ValidationError("the slack bus cannot carry a specified injection");
  }
  if (!(options.tolerance_pu > 0.0)) throw ValidationError("tolerance_pu must be positive");

  std::vector<cd> load(n);
  for (std::size_t i = 0; i < n; ++i) load[i] = cd{inj.p_mw[i], inj.q_mvar[i]} / base_mva_;

  std::vector<cd> v(n, cd{1.0, 0.0});
  std::vector<cd> i_load(n);
  std::vector<cd> i_edge(n);

  SnapshotSolution sol;
  double mismatch = 0.0;
  int it = 0;
  while (it < options.max_iterations) {
    ++it;
    for (std::size_t k = 0; k < n; ++k) i_load[k] = std::conj(load[k] / v[k]);
    // Backward sweep: accumulate currents leaf to root.
    std::fill(i_edge.begin(), i_edge.end(), cd{});
    for (auto r = order_.rbegin(); r != order_.rend(); ++r) {
      const auto k = static_cast<std::size_t>(*r);
      i_edge[k] += i_load[k];
      if (parent_[k] >= 0) i_edge[static_cast<std::size_t>(parent_[k])] += i_edge[k];
    }
    // Forward sweep: voltage drops root to leaf.
    for (int b : order_) {
      const auto k = static_cast<std::size_t>(b);
      if (parent_[k] < 0) continue;
      v[k] = v[static_cast<std::size_t>(parent_[k])] - parent_edge_[k].z_pu * i_edge[k];
    }
    mismatch = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == s) continue;
      mismatch = std::max(mismatch, std::abs(v[k] * std::conj(i_load[k]) - load[k]));
    }
    if (mismatch < options.tolerance_pu) break;
  }

  sol.converged = mismatch < options.tolerance_pu;
  sol.iterations = it;
  sol.max_mismatch_pu = mismatch;
  sol.v_pu.resize(n);
  sol.angle_rad.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    sol.v_pu[k] = std::abs(v[k]);
    sol.angle_rad[k] = std::arg(v[k]);
  }
  sol.v_pu[s] = 1.0;
  sol.angle_rad[s] = 0.0;

  // i_edge[k] is the current through k's parent edge, except at the slack
  // where it is the total current leaving the slack bus.
  const cd slack_power = v[s] * std::conj(i_edge[s] - i_load[s]) * base_mva_;
  sol.slack_p_mw = slack_power.real();
  sol.slack_q_mvar = slack_power.imag();
  double load_mw = 0.0;
  for (std::size_t k = 0; k < n; ++k) load_mw += inj.p_mw[k];
  sol.losses_mw = sol.slack_p_mw - load_mw;

  sol.branch_current_a.assign(branch_child_.size(), 0.0);
  sol.branch_loading_pct.assign(branch_child_.size(), 0.0);
  for (std::size_t b = 0; b < branch_child_.size(); ++b) {
    const auto c = static_cast<std::size_t>(branch_child_[b]);
    const double amps = std::abs(i_edge[c]) * current_base_a_[c];
    sol.branch_current_a[b] = amps;
    sol.branch_loading_pct[b] = amps / branch_ampacity_a_[b] * 100.0;
  }
  sol.trafo_kva.assign(trafo_child_.size(), 0.0);
  sol.trafo_loading_pct.assign(trafo_child_.size(), 0.0);
  for (std::size_t t = 0; t < trafo_child_.size(); ++t) {
    const auto c = static_cast<std::size_t>(trafo_child_[t]);
    const auto hv = static_cast<std::size_t>(trafo_hv_[t]);
    const double kva = std::abs(v[hv]) * std::abs(i_edge[c]) * base_mva_ * 1000.0;
    sol.trafo_kva[t] = kva;
    sol.trafo_loading_pct[t] = kva / trafo_rating_kva_[t] * 100.0;
  }
  return sol;
}

SnapshotSolution solve_snapshot(const Grid& grid, const SnapshotInjections& injections,
                                const SolverOptions& options) {
  return RadialNetwork(grid).solve(injections, options);
}

namespace {

void check_series(std::span<const SnapshotInjections> series) {
  if (series.size() != static_cast<std::size_t>(kStepsPerDay)) {
    throw ValidationError("quasi-dynamic run needs " + std::to_string(kStepsPerDay) + " snapshots, got " +
                          std::to_string(series.size()));
  }
}

void check_converged(const SolutionSeries& out) {
  for (std::size_t t = 0; t < out.steps.size(); ++t) {
    if (!out.steps[t].converged) {
      throw NumericalError("power flow did not converge at step " + std::to_string(t) + " (mismatch " +
                               std::to_string(out.steps[t].max_mismatch_pu) + " p.u.)",
                           static_cast<int>(t));
    }
  }
}

}  // namespace

SolutionSeries run_quasi_dynamic_serial(const RadialNetwork& network, std::span<const SnapshotInjections> series,
                                        const SolverOptions& options) {
  check_series(series);
  SolutionSeries out;
  out.steps.reserve(series.size());
  for (const auto& snap : series) out.steps.push_back(network.solve(snap, options));
  check_converged(out);
  return out;
}

SolutionSeries run_quasi_dynamic(const RadialNetwork& network, std::span<const SnapshotInjections> series,
                                 const SolverOptions& options) {
  check_series(series);
  SolutionSeries out;
  out.steps.resize(series.size());
  std::exception_ptr failure;
  const int n = static_cast<int>(series.size());
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < n; ++t) {
    try {
      out.steps[static_cast<std::size_t>(t)] = network.solve(series[static_cast<std::size_t>(t)], options);
    } catch (...) {
#pragma omp critical(gridsim_qd_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  check_converged(out);
  return out;
}

SolutionSeries run_quasi_dynamic(const Grid& grid, std::span<const SnapshotInjections> series,
                                 const SolverOptions& options) {
  return run_quasi_dynamic(RadialNetwork(grid), series, options);
}

}  // namespace gridsim
