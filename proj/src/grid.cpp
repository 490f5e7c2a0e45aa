#include "gridsim/grid.hpp"

#include <cmath>

namespace gridsim {

int Grid::bus_index(std::string_view id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

const Bus* Grid::find_bus(std::string_view id) const {
  const int i = bus_index(id);
  return i < 0 ? nullptr : &buses[static_cast<std::size_t>(i)];
}

int Grid::slack_index() const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].kind == BusKind::Slack) return static_cast<int>(i);
  }
  return -1;
}

std::unordered_map<std::string, int> bus_index_map(const Grid& grid) {
  std::unordered_map<std::string, int> map;
  map.reserve(grid.buses.size());
  for (std::size_t i = 0; i < grid.buses.size(); ++i) {
    map.emplace(grid.buses[i].id, static_cast<int>(i));
  }
  return map;
}

std::string_view to_string(BusKind v) { return v == BusKind::Slack ? "slack" : "pq"; }

std::string_view to_string(Material v) {
  switch (v) {
    case Material::AL: return "AL";
    case Material::AC: return "AC";
    case Material::CU: return "CU";
  }
  return "";
}

std::string_view to_string(TransformerRole v) {
  switch (v) {
    case TransformerRole::Primary: return "primary";
    case TransformerRole::Distribution: return "distribution";
    case TransformerRole::GeneratorStepUp: return "generator_stepup";
  }
  return "";
}

std::string_view to_string(GeneratorKind v) {
  switch (v) {
    case GeneratorKind::SI: return "SI";
    case GeneratorKind::AS: return "AS";
    case GeneratorKind::ST: return "ST";
  }
  return "";
}

std::string_view to_string(LoadClass v) {
  return v == LoadClass::MvCustomer ? "mv_customer" : "lv_aggregate";
}

std::optional<BusKind> parse_bus_kind(std::string_view s) {
  if (s == "slack") return BusKind::Slack;
  if (s == "pq") return BusKind::Pq;
  return std::nullopt;
}

std::optional<Material> parse_material(std::string_view s) {
  if (s == "AL") return Material::AL;
  if (s == "AC") return Material::AC;
  if (s == "CU") return Material::CU;
  return std::nullopt;
}

std::optional<TransformerRole> parse_transformer_role(std::string_view s) {
  if (s == "primary") return TransformerRole::Primary;
  if (s == "distribution") return TransformerRole::Distribution;
  if (s == "generator_stepup") return TransformerRole::GeneratorStepUp;
  return std::nullopt;
}

std::optional<GeneratorKind> parse_generator_kind(std::string_view s) {
  if (s == "SI") return GeneratorKind::SI;
  if (s == "AS") return GeneratorKind::AS;
  if (s == "ST") return GeneratorKind::ST;
  return std::nullopt;
}

std::optional<LoadClass> parse_load_class(std::string_view s) {
  if (s == "mv_customer") return LoadClass::MvCustomer;
  if (s == "lv_aggregate") return LoadClass::LvAggregate;
  return std::nullopt;
}

Grid scale_demand(const Grid& grid, double factor) {
  Grid out = grid;
  for (auto& load : out.loads) load.installed_kw *= factor;
  return out;
}

std::vector<std::string> buses_at_kv(const Grid& grid, double kv) {
  std::vector<std::string> ids;
  for (const auto& bus : grid.buses) {
    if (std::abs(bus.nominal_kv - kv) < 1e-9) ids.push_back(bus.id);
  }
  return ids;
}

}  // namespace gridsim
