#include "gridsim/validate.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace gridsim {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  /// Returns false when a and b were already joined.
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

struct Edge {
  int a;
  int b;
  const std::string* id;
};

template <typename T>
void check_unique(const std::vector<T>& items, const char* coll, ValidationReport& report) {
  std::unordered_set<std::string> seen;
  for (const auto& item : items) {
    if (!seen.insert(item.id).second) {
      report.violations.push_back(
          {"duplicate_id", std::string("duplicate id '") + item.id + "' in " + coll, {item.id}});
    }
  }
}

}  // namespace

bool ValidationReport::has(const std::string& code) const {
  for (const auto& v : violations) {
    if (v.code == code) return true;
  }
  return false;
}

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (const auto& v : violations) out << v.code << ": " << v.message << "\n";
  return out.str();
}

ValidationReport validate_grid(const Grid& grid) {
  ValidationReport report;
  auto add = [&](std::string code, std::string message, std::vector<std::string> ids) {
    report.violations.push_back({std::move(code), std::move(message), std::move(ids)});
  };

  std::vector<std::string> slacks;
  for (const auto& b : grid.buses) {
    if (b.kind == BusKind::Slack) slacks.push_back(b.id);
    if (!(b.nominal_kv > 0.0)) add("bus_voltage", "bus " + b.id + " has non-positive nominal_kv", {b.id});
  }
  if (slacks.empty()) add("no_slack_bus", "no slack bus", {});
  if (slacks.size() > 1) add("multiple_slack_buses", "multiple slack buses", slacks);

  check_unique(grid.buses, "buses", report);
  check_unique(grid.branches, "branches", report);
  check_unique(grid.transformers, "transformers", report);
  check_unique(grid.generators, "generators", report);
  check_unique(grid.loads, "loads", report);

  const auto index = bus_index_map(grid);
  auto lookup = [&](const std::string& bus, const std::string& owner) -> int {
    auto it = index.find(bus);
    if (it == index.end()) {
      add("unresolved_reference", "unresolved bus reference '" + bus + "' in " + owner, {owner, bus});
      return -1;
    }
    return it->second;
  };
  auto kv_of = [&](int i) { return grid.buses[static_cast<std::size_t>(i)].nominal_kv; };

  std::vector<Edge> edges;
  for (const auto& br : grid.branches) {
    const int a = lookup(br.from_bus, br.id);
    const int b = lookup(br.to_bus, br.id);
    if (!(br.length_km > 0.0) || !(br.r_ohm_per_km > 0.0) || !(br.x_ohm_per_km >= 0.0) ||
        !(br.ampacity_a > 0.0)) {
      add("branch_parameters", "branch " + br.id + " has out-of-range electrical parameters", {br.id});
    }
    if (br.from_bus == br.to_bus) add("branch_self_loop", "branch " + br.id + " joins a bus to itself", {br.id});
    if (a >= 0 && b >= 0) {
      if (std::abs(kv_of(a) - kv_of(b)) > 1e-9) {
        add("branch_voltage_mismatch", "branch " + br.id + " joins buses of different nominal voltage",
            {br.id, br.from_bus, br.to_bus});
      }
      edges.push_back({a, b, &br.id});
    }
  }

  std::unordered_map<std::string, int> aggregates_per_bus;
  for (const auto& l : grid.loads) {
    if (l.load_class == LoadClass::LvAggregate) ++aggregates_per_bus[l.bus];
  }

  const double tap_tol = grid.tap_tolerance_percent / 100.0;
  for (const auto& tr : grid.transformers) {
    const int hv = lookup(tr.hv_bus, tr.id);
    const int lv = lookup(tr.lv_bus, tr.id);
    if (!(tr.rating_kva > 0.0) || !(tr.uk_percent > 0.0 && tr.uk_percent < 25.0) ||
        !(tr.load_loss_kw >= 0.0)) {
      add("transformer_parameters", "transformer " + tr.id + " has out-of-range parameters", {tr.id});
    }
    if (hv >= 0 && lv >= 0) {
      const bool v1_ok = std::abs(tr.v1_kv / kv_of(hv) - 1.0) <= tap_tol + 1e-12;
      const bool v2_ok = std::abs(tr.v2_kv / kv_of(lv) - 1.0) <= tap_tol + 1e-12;
      if (!v1_ok || !v2_ok) {
        add("transformer_voltage_mismatch",
            "transformer " + tr.id + " winding voltages do not match its bus nominals", {tr.id});
      }
      edges.push_back({hv, lv, &tr.id});
    }
    if (tr.role == TransformerRole::Distribution) {
      auto it = aggregates_per_bus.find(tr.lv_bus);
      const int n = it == aggregates_per_bus.end() ? 0 : it->second;
      if (n != 1) {
        add("substation_aggregate_count",
            "secondary substation " + tr.id + " has " + std::to_string(n) +
                " LV aggregate loads, expected exactly 1",
            {tr.id, tr.lv_bus});
      }
    }
  }

  for (const auto& g : grid.generators) {
    lookup(g.bus, g.id);
    if (!(g.rated_kva > 0.0)) add("generator_parameters", "generator " + g.id + " has non-positive rating", {g.id});
    const double pf = g.power_factor;
    if (g.kind == GeneratorKind::ST && pf != 1.0) {
      add("generator_power_factor", "static generator " + g.id + " must have power factor 1", {g.id});
    }
    if (g.kind != GeneratorKind::ST && std::abs(pf - 0.8) > 1e-12 && std::abs(pf - 0.9) > 1e-12) {
      add("generator_power_factor", "rotating generator " + g.id + " must have power factor 0.8 or 0.9",
          {g.id});
    }
  }

  for (const auto& l : grid.loads) {
    lookup(l.bus, l.id);
    if (!(l.installed_kw > 0.0)) add("load_parameters", "load " + l.id + " has non-positive installed_kw", {l.id});
    if (!(l.power_factor > 0.0 && l.power_factor <= 1.0)) {
      add("load_parameters", "load " + l.id + " has power factor outside (0, 1]", {l.id});
    }
    if (l.load_class == LoadClass::LvAggregate && l.n_households < 1) {
      add("load_parameters", "LV aggregate " + l.id + " has no households", {l.id});
    }
  }

  // Connectivity and radiality over the bus graph.
  const std::size_t n = grid.buses.size();
  if (n > 0) {
    DisjointSets all(n);
    bool meshed = false;
    for (const auto& e : edges) {
      if (!all.unite(static_cast<std::size_t>(e.a), static_cast<std::size_t>(e.b))) meshed = true;
    }
    std::vector<std::string> isolated;
    const std::size_t root = all.find(0);
    for (std::size_t i = 0; i < n; ++i) {
      if (all.find(i) != root) isolated.push_back(grid.buses[i].id);
    }
    if (!isolated.empty()) add("not_connected", "network is not connected", isolated);

    std::map<std::string, std::vector<int>> feeders;
    for (std::size_t i = 0; i < n; ++i) {
      if (grid.buses[i].feeder_id) feeders[*grid.buses[i].feeder_id].push_back(static_cast<int>(i));
    }
    bool feeder_cycle = false;
    for (const auto& [feeder, members] : feeders) {
      std::unordered_set<int> in_feeder(members.begin(), members.end());
      DisjointSets ds(n);
      for (const auto& e : edges) {
        if (!in_feeder.count(e.a) || !in_feeder.count(e.b)) continue;
        if (!ds.unite(static_cast<std::size_t>(e.a), static_cast<std::size_t>(e.b))) {
          add("feeder_not_radial", "feeder not radial: " + feeder + " (cycle closed by " + *e.id + ")",
              {feeder, *e.id});
          feeder_cycle = true;
          break;
        }
      }
    }
    if (meshed && !feeder_cycle) {
      add("network_not_radial", "network contains a loop outside any single feeder", {});
    }
  }

  return report;
}

}  // namespace gridsim
