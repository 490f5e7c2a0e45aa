#include "gridsim/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "gridsim/rng.hpp"

namespace gridsim {

namespace reference {

namespace {

constexpr std::array<RatingCount, 6> kDistribution{{
    {630, 7}, {400, 56}, {250, 52}, {160, 12}, {100, 9}, {63, 2}}};

constexpr std::array<RatingCount, 9> kGeneratorTrafos{{
    {2000, 1}, {1600, 4}, {1250, 1}, {1000, 3}, {800, 2}, {630, 4}, {600, 1}, {500, 3}, {400, 2}}};

constexpr std::array<ConductorRow, 13> kConductors{{
    {240, Material::AL, 18.7, 49},
    {185, Material::AL, 16.8, 39},
    {150, Material::AL, 10.3, 24},
    {150, Material::CU, 9.8, 23},
    {100, Material::CU, 0.337, 2},
    {95, Material::CU, 4.67, 19},
    {70, Material::CU, 0.16, 1},
    {63, Material::CU, 0.44, 2},
    {54, Material::AC, 3.34, 2},
    {40, Material::CU, 0.72, 4},
    {35, Material::AL, 2.16, 6},
    {25, Material::CU, 1.15, 5},
    {20, Material::CU, 0.07, 1},
}};

constexpr std::array<GeneratorFleetRow, 3> kGenerators{{
    {GeneratorKind::SI, 2842.0, 3}, {GeneratorKind::AS, 829.0, 7}, {GeneratorKind::ST, 4685.8, 11}}};

}  // namespace

std::span<const RatingCount> distribution_transformers() { return kDistribution; }
std::span<const RatingCount> generator_transformers() { return kGeneratorTrafos; }
std::span<const ConductorRow> conductors() { return kConductors; }
std::span<const GeneratorFleetRow> generator_fleet() { return kGenerators; }

ConductorRow residual_conductor() { return {120, Material::AL, 0.25, 1}; }

std::string trunk_bus_id(int feeder, int position) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "F%d-T%02d", feeder, position);
  return buf;
}

}  // namespace reference

double conductor_resistance_ohm_per_km(double cross_section_mm2, Material material) {
  double rho = 0.0;  // ohm mm2 / m
  switch (material) {
    case Material::AL: rho = 0.0282; break;
    case Material::AC: rho = 0.0325; break;
    case Material::CU: rho = 0.0178; break;
  }
  return rho * 1000.0 / cross_section_mm2;
}

double conductor_reactance_ohm_per_km(double cross_section_mm2) {
  return cross_section_mm2 >= 95.0 ? 0.11 : 0.35;
}

double conductor_ampacity_a(double cross_section_mm2, Material material) {
  struct Entry {
    double size;
    Material material;
    double amps;
  };
  static constexpr std::array<Entry, 15> kTable{{
      {240, Material::AL, 455}, {185, Material::AL, 395}, {150, Material::AL, 350},
      {150, Material::CU, 445}, {120, Material::AL, 310}, {100, Material::CU, 355},
      {95, Material::CU, 345},  {70, Material::CU, 310},  {63, Material::CU, 290},
      {54, Material::AC, 225},  {40, Material::CU, 220},  {35, Material::AL, 170},
      {25, Material::CU, 180},  {20, Material::CU, 150},  {35, Material::CU, 215},
  }};
  for (const auto& e : kTable) {
    if (e.size == cross_section_mm2 && e.material == material) return e.amps;
  }
  // Off-table sizes: scale the 240 mm2 AL rating by area^0.6.
  const double base = material == Material::CU ? 560.0 : 455.0;
  return base * std::pow(cross_section_mm2 / 240.0, 0.6);
}

namespace {

std::string numbered(const char* prefix, int n, int width = 3) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, n);
  return buf;
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

/// Splits `total_units` integer units over `weights` by largest remainder so
/// that the parts sum exactly to the total.
std::vector<long long> apportion(long long total_units, const std::vector<double>& weights) {
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<long long> parts(weights.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  long long assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(total_units) * weights[i] / wsum;
    parts[i] = static_cast<long long>(std::floor(exact));
    assigned += parts[i];
    remainders.emplace_back(exact - static_cast<double>(parts[i]), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (long long k = 0; k < total_units - assigned; ++k) {
    ++parts[remainders[static_cast<std::size_t>(k) % remainders.size()].second];
  }
  return parts;
}

std::vector<double> random_weights(std::size_t n, Rng& rng, double lo, double hi) {
  std::vector<double> w(n);
  for (auto& x : w) x = rng.uniform(lo, hi);
  return w;
}

struct PendingBranch {
  ConductorRow row;
  double length_km;
};

}  // namespace

Grid synthesize_reference_grid(std::uint64_t seed) {
  using namespace reference;
  Rng rng(mix_seed(seed, 0x67726964));

  Grid grid;
  grid.name = "reference-grid";
  grid.base_mva = 10.0;
  grid.tap_tolerance_percent = 5.0;
  grid.seed = static_cast<long long>(seed);

  grid.buses.push_back({"HV", kHvKv, BusKind::Slack, std::nullopt});
  grid.buses.push_back({"MV-BB", kMvKv, BusKind::Pq, std::nullopt});
  grid.transformers.push_back({"TR-PRIMARY", "HV", "MV-BB", kPrimaryRatingKva, kHvKv, kPrimaryV2Kv, 12.5,
                               0.005 * kPrimaryRatingKva, TransformerRole::Primary});

  // Branch pool: per-row lengths in 0.1 m units so each row total is exact.
  std::vector<PendingBranch> trunk_pool;
  std::vector<PendingBranch> spur_pool;
  auto add_row = [&](const ConductorRow& row) {
    const auto units = apportion(std::llround(row.total_length_km * 1e4),
                                 random_weights(static_cast<std::size_t>(row.quantity), rng, 0.5, 1.5));
    for (long long u : units) {
      PendingBranch pb{row, static_cast<double>(u) / 1e4};
      (row.cross_section_mm2 >= 150.0 ? trunk_pool : spur_pool).push_back(pb);
    }
  };
  for (const auto& row : conductors()) add_row(row);
  add_row(residual_conductor());

  // Trunks taper outward: dealing the size-sorted pool round-robin puts the
  // largest sections next to the busbar on every feeder.
  std::stable_sort(trunk_pool.begin(), trunk_pool.end(), [](const auto& a, const auto& b) {
    return a.row.cross_section_mm2 > b.row.cross_section_mm2;
  });
  std::array<std::vector<PendingBranch>, kFeeders> trunk_by_feeder;
  for (std::size_t k = 0; k < trunk_pool.size(); ++k) trunk_by_feeder[k % kFeeders].push_back(trunk_pool[k]);
  std::array<std::vector<PendingBranch>, kFeeders> spur_by_feeder;
  for (std::size_t k = 0; k < spur_pool.size(); ++k) spur_by_feeder[k % kFeeders].push_back(spur_pool[k]);

  std::array<std::vector<std::string>, kFeeders> trunk_nodes;
  std::array<std::vector<std::string>, kFeeders> all_nodes;
  int branch_no = 0;
  auto emit_branch = [&](const PendingBranch& pb, const std::string& from, const std::string& to) {
    const double a = pb.row.cross_section_mm2;
    grid.branches.push_back({numbered("L", ++branch_no), from, to, pb.length_km, a, pb.row.material,
                             conductor_resistance_ohm_per_km(a, pb.row.material),
                             conductor_reactance_ohm_per_km(a), conductor_ampacity_a(a, pb.row.material)});
  };

  for (int f = 0; f < kFeeders; ++f) {
    const std::string feeder = "F" + std::to_string(f + 1);
    std::string prev = "MV-BB";
    for (std::size_t k = 0; k < trunk_by_feeder[f].size(); ++k) {
      const std::string node = trunk_bus_id(f + 1, static_cast<int>(k + 1));
      grid.buses.push_back({node, kMvKv, BusKind::Pq, feeder});
      emit_branch(trunk_by_feeder[f][k], prev, node);
      trunk_nodes[f].push_back(node);
      all_nodes[f].push_back(node);
      prev = node;
    }
    // Laterals hang off the outer two thirds of the trunk, sometimes chained.
    const std::size_t n_trunk = trunk_nodes[f].size();
    std::string last_spur;
    for (std::size_t k = 0; k < spur_by_feeder[f].size(); ++k) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "F%d-S%02d", f + 1, static_cast<int>(k + 1));
      const std::string node = buf;
      std::string parent;
      if (!last_spur.empty() && rng.uniform() < 0.35) {
        parent = last_spur;
      } else {
        const std::size_t lo = n_trunk / 3;
        parent = trunk_nodes[f][lo + static_cast<std::size_t>(rng.below(n_trunk - lo))];
      }
      grid.buses.push_back({node, kMvKv, BusKind::Pq, feeder});
      emit_branch(spur_by_feeder[f][k], parent, node);
      all_nodes[f].push_back(node);
      last_spur = node;
    }
  }

  // Secondary substations: round-robin over feeders, distinct nodes first.
  std::vector<double> ss_ratings;
  for (const auto& rc : distribution_transformers()) {
    for (int i = 0; i < rc.quantity; ++i) ss_ratings.push_back(rc.rating_kva);
  }
  shuffle(ss_ratings, rng);
  const auto households = apportion(kHouseholds, ss_ratings);
  std::array<std::vector<std::string>, kFeeders> host_order;
  for (int f = 0; f < kFeeders; ++f) {
    host_order[f] = all_nodes[f];
    shuffle(host_order[f], rng);
  }
  std::array<std::size_t, kFeeders> next_host{};
  for (std::size_t i = 0; i < ss_ratings.size(); ++i) {
    const int f = static_cast<int>(i % kFeeders);
    const auto& hosts = host_order[f];
    const std::string mv_node = hosts[next_host[f]++ % hosts.size()];
    const std::string tag = numbered("SS", static_cast<int>(i + 1));
    const std::string lv_bus = tag + "-LV";
    grid.buses.push_back({lv_bus, kLvKv, BusKind::Pq, "F" + std::to_string(f + 1)});
    grid.transformers.push_back({"TR-" + tag, mv_node, lv_bus, ss_ratings[i], kMvKv, kLvKv, 4.0,
                                 0.011 * ss_ratings[i], TransformerRole::Distribution});
    const int n_hh = static_cast<int>(households[i]);
    grid.loads.push_back({"LV-" + tag, lv_bus, LoadClass::LvAggregate, kInstalledKwPerHousehold * n_hh, n_hh,
                          kLvPowerFactor, "lv_household"});
  }

  // MV customers on the inner half of each trunk, close to the primary
  // substation; the prosumer subset carries the generators.
  std::vector<int> customer_order(kMvCustomers);
  std::iota(customer_order.begin(), customer_order.end(), 0);
  shuffle(customer_order, rng);
  std::vector<bool> is_prosumer(kMvCustomers, false);
  for (int k = 0; k < kProsumers; ++k) is_prosumer[static_cast<std::size_t>(customer_order[k])] = true;
  const auto prosumer_kw = apportion(static_cast<long long>(kProsumerInstalledKw),
                                     random_weights(kProsumers, rng, 0.4, 1.6));
  const auto consumer_kw = apportion(static_cast<long long>(kMvInstalledKw - kProsumerInstalledKw),
                                     random_weights(kMvCustomers - kProsumers, rng, 0.4, 1.6));
  std::vector<std::string> prosumer_nodes;
  std::size_t pi = 0;
  std::size_t ci = 0;
  for (int c = 0; c < kMvCustomers; ++c) {
    const int f = c % kFeeders;
    const auto& trunk = trunk_nodes[f];
    const std::string node = trunk[static_cast<std::size_t>(rng.below((trunk.size() + 1) / 2))];
    const bool prosumer = is_prosumer[static_cast<std::size_t>(c)];
    const double kw = static_cast<double>(prosumer ? prosumer_kw[pi++] : consumer_kw[ci++]);
    grid.loads.push_back({numbered("MV", c + 1, 2), node, LoadClass::MvCustomer, kw, 0, kMvPowerFactor,
                          "mv_customer"});
    if (prosumer) prosumer_nodes.push_back(node);
  }

  // Generators: split each fleet total in 0.1 kVA units, pair largest unit
  // with largest step-up transformer.
  struct Unit {
    GeneratorKind kind;
    double kva;
  };
  std::vector<Unit> units;
  for (const auto& row : generator_fleet()) {
    const auto parts = apportion(std::llround(row.total_kva * 10.0),
                                 random_weights(static_cast<std::size_t>(row.quantity), rng, 0.6, 1.4));
    for (long long p : parts) units.push_back({row.kind, static_cast<double>(p) / 10.0});
  }
  std::stable_sort(units.begin(), units.end(), [](const Unit& a, const Unit& b) { return a.kva > b.kva; });
  std::vector<double> gen_trafos;
  for (const auto& rc : generator_transformers()) {
    for (int i = 0; i < rc.quantity; ++i) gen_trafos.push_back(rc.rating_kva);
  }
  for (std::size_t g = 0; g < units.size(); ++g) {
    const std::string tag = numbered("G", static_cast<int>(g + 1), 2);
    const std::string lv_bus = tag + "-LV";
    const std::string& mv_node = prosumer_nodes[g % prosumer_nodes.size()];
    const Bus* host = grid.find_bus(mv_node);
    grid.buses.push_back({lv_bus, kLvKv, BusKind::Pq, host->feeder_id});
    const double rating = gen_trafos[g];
    const bool small = rating <= 630.0;
    grid.transformers.push_back({"TR-" + tag, mv_node, lv_bus, rating, kMvKv, kLvKv, small ? 4.0 : 6.0,
                                 (small ? 0.011 : 0.010) * rating, TransformerRole::GeneratorStepUp});
    const Unit& u = units[g];
    const double pf = u.kind == GeneratorKind::ST ? 1.0 : (rng.uniform() < 0.5 ? 0.8 : 0.9);
    grid.generators.push_back({tag, lv_bus, u.kind, u.kva, pf, u.kind == GeneratorKind::ST ? "pv" : "rotating_dg"});
  }

  return grid;
}

}  // namespace gridsim
