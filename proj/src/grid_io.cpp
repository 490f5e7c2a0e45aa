#include "gridsim/grid_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "gridsim/error.hpp"
#include "json.hpp"

namespace gridsim {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(where + ": missing field '" + key + "'");
  }
  return *it;
}

double get_number(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number()) throw ParseError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw ParseError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

template <typename Enum, typename ParseFn>
Enum get_enum(const json& obj, const char* key, const std::string& where, ParseFn parse) {
  const std::string s = get_string(obj, key, where);
  auto v = parse(s);
  if (!v) throw ParseError(where + ": field '" + key + "' has unknown value '" + s + "'");
  return *v;
}

const json& get_array(const json& doc, const char* key) {
  const json& v = require(doc, key, "document");
  if (!v.is_array()) throw ParseError(std::string("document: '") + key + "' must be an array");
  return v;
}

std::string where(const char* coll, std::size_t i) {
  return std::string(coll) + "[" + std::to_string(i) + "]";
}

template <typename T>
void check_unique(const std::vector<T>& items, const char* coll) {
  std::unordered_set<std::string> seen;
  for (const auto& item : items) {
    if (!seen.insert(item.id).second) {
      throw ValidationError(std::string("duplicate id '") + item.id + "' in " + coll);
    }
  }
}

}  // namespace

Grid load_grid(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("syntax error at byte ") + std::to_string(e.byte) + ": " + e.what(),
                     e.byte);
  }
  if (!doc.is_object()) throw ParseError("document: top level must be an object");

  const std::string format = get_string(doc, "format", "document");
  if (format != kGridFormat) {
    throw ParseError("document: unsupported format '" + format + "', expected '" +
                     std::string(kGridFormat) + "'");
  }

  Grid grid;
  grid.base_mva = get_number(doc, "base_mva", "document");
  if (auto it = doc.find("name"); it != doc.end() && it->is_string()) grid.name = it->get<std::string>();
  if (auto it = doc.find("tap_tolerance_percent"); it != doc.end()) {
    grid.tap_tolerance_percent = get_number(doc, "tap_tolerance_percent", "document");
  }
  if (auto it = doc.find("seed"); it != doc.end() && !it->is_null()) {
    if (!it->is_number_integer()) throw ParseError("document: 'seed' must be an integer");
    grid.seed = it->get<long long>();
  }

  const json& buses = get_array(doc, "buses");
  for (std::size_t i = 0; i < buses.size(); ++i) {
    const json& b = buses[i];
    const std::string w = where("buses", i);
    Bus bus;
    bus.id = get_string(b, "id", w);
    bus.nominal_kv = get_number(b, "nominal_kv", w);
    bus.kind = get_enum<BusKind>(b, "kind", w, parse_bus_kind);
    if (auto it = b.find("feeder_id"); it != b.end() && !it->is_null()) {
      bus.feeder_id = get_string(b, "feeder_id", w);
    }
    grid.buses.push_back(std::move(bus));
  }

  const json& branches = get_array(doc, "branches");
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const json& b = branches[i];
    const std::string w = where("branches", i);
    Branch br;
    br.id = get_string(b, "id", w);
    br.from_bus = get_string(b, "from_bus", w);
    br.to_bus = get_string(b, "to_bus", w);
    br.length_km = get_number(b, "length_km", w);
    br.cross_section_mm2 = get_number(b, "cross_section_mm2", w);
    br.material = get_enum<Material>(b, "material", w, parse_material);
    br.r_ohm_per_km = get_number(b, "r_ohm_per_km", w);
    br.x_ohm_per_km = get_number(b, "x_ohm_per_km", w);
    br.ampacity_a = get_number(b, "ampacity_a", w);
    grid.branches.push_back(std::move(br));
  }

  const json& trafos = get_array(doc, "transformers");
  for (std::size_t i = 0; i < trafos.size(); ++i) {
    const json& t = trafos[i];
    const std::string w = where("transformers", i);
    Transformer tr;
    tr.id = get_string(t, "id", w);
    tr.hv_bus = get_string(t, "hv_bus", w);
    tr.lv_bus = get_string(t, "lv_bus", w);
    tr.rating_kva = get_number(t, "rating_kva", w);
    tr.v1_kv = get_number(t, "v1_kv", w);
    tr.v2_kv = get_number(t, "v2_kv", w);
    tr.uk_percent = get_number(t, "uk_percent", w);
    tr.load_loss_kw = get_number(t, "load_loss_kw", w);
    tr.role = get_enum<TransformerRole>(t, "role", w, parse_transformer_role);
    grid.transformers.push_back(std::move(tr));
  }

  const json& gens = get_array(doc, "generators");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const json& g = gens[i];
    const std::string w = where("generators", i);
    Generator gen;
    gen.id = get_string(g, "id", w);
    gen.bus = get_string(g, "bus", w);
    gen.kind = get_enum<GeneratorKind>(g, "kind", w, parse_generator_kind);
    gen.rated_kva = get_number(g, "rated_kva", w);
    gen.power_factor = get_number(g, "power_factor", w);
    gen.profile_ref = get_string(g, "profile_ref", w);
    grid.generators.push_back(std::move(gen));
  }

  const json& loads = get_array(doc, "loads");
  for (std::size_t i = 0; i < loads.size(); ++i) {
    const json& l = loads[i];
    const std::string w = where("loads", i);
    LoadPoint load;
    load.id = get_string(l, "id", w);
    load.bus = get_string(l, "bus", w);
    load.load_class = get_enum<LoadClass>(l, "class", w, parse_load_class);
    load.installed_kw = get_number(l, "installed_kw", w);
    if (auto it = l.find("n_households"); it != l.end()) {
      if (!it->is_number_integer()) throw ParseError(w + ": field 'n_households' must be an integer");
      load.n_households = it->get<int>();
    }
    load.power_factor = get_number(l, "power_factor", w);
    load.profile_ref = get_string(l, "profile_ref", w);
    grid.loads.push_back(std::move(load));
  }

  check_unique(grid.buses, "buses");
  check_unique(grid.branches, "branches");
  check_unique(grid.transformers, "transformers");
  check_unique(grid.generators, "generators");
  check_unique(grid.loads, "loads");

  const auto index = bus_index_map(grid);
  auto resolve = [&](const std::string& bus, const std::string& owner) -> const Bus& {
    auto it = index.find(bus);
    if (it == index.end()) {
      throw ValidationError("unresolved bus reference '" + bus + "' in " + owner);
    }
    return grid.buses[static_cast<std::size_t>(it->second)];
  };
  for (const auto& br : grid.branches) {
    const Bus& a = resolve(br.from_bus, "branch " + br.id);
    const Bus& b = resolve(br.to_bus, "branch " + br.id);
    if (std::abs(a.nominal_kv - b.nominal_kv) > 1e-9) {
      throw ValidationError("voltage mismatch across branch " + br.id + ": " + a.id + " is " +
                            std::to_string(a.nominal_kv) + " kV, " + b.id + " is " +
                            std::to_string(b.nominal_kv) + " kV");
    }
  }
  for (const auto& tr : grid.transformers) {
    resolve(tr.hv_bus, "transformer " + tr.id);
    resolve(tr.lv_bus, "transformer " + tr.id);
  }
  for (const auto& g : grid.generators) resolve(g.bus, "generator " + g.id);
  for (const auto& l : grid.loads) resolve(l.bus, "load " + l.id);

  return grid;
}

std::string serialize_grid(const Grid& grid) {
  json doc;
  doc["format"] = kGridFormat;
  doc["name"] = grid.name;
  doc["base_mva"] = grid.base_mva;
  doc["tap_tolerance_percent"] = grid.tap_tolerance_percent;
  if (grid.seed) doc["seed"] = *grid.seed;

  json buses = json::array();
  for (const auto& b : grid.buses) {
    json j{{"id", b.id}, {"nominal_kv", b.nominal_kv}, {"kind", to_string(b.kind)}};
    if (b.feeder_id) j["feeder_id"] = *b.feeder_id;
    buses.push_back(std::move(j));
  }
  json branches = json::array();
  for (const auto& b : grid.branches) {
    branches.push_back({{"id", b.id},
                        {"from_bus", b.from_bus},
                        {"to_bus", b.to_bus},
                        {"length_km", b.length_km},
                        {"cross_section_mm2", b.cross_section_mm2},
                        {"material", to_string(b.material)},
                        {"r_ohm_per_km", b.r_ohm_per_km},
                        {"x_ohm_per_km", b.x_ohm_per_km},
                        {"ampacity_a", b.ampacity_a}});
  }
  json trafos = json::array();
  for (const auto& t : grid.transformers) {
    trafos.push_back({{"id", t.id},
                      {"hv_bus", t.hv_bus},
                      {"lv_bus", t.lv_bus},
                      {"rating_kva", t.rating_kva},
                      {"v1_kv", t.v1_kv},
                      {"v2_kv", t.v2_kv},
                      {"uk_percent", t.uk_percent},
                      {"load_loss_kw", t.load_loss_kw},
                      {"role", to_string(t.role)}});
  }
  json gens = json::array();
  for (const auto& g : grid.generators) {
    gens.push_back({{"id", g.id},
                    {"bus", g.bus},
                    {"kind", to_string(g.kind)},
                    {"rated_kva", g.rated_kva},
                    {"power_factor", g.power_factor},
                    {"profile_ref", g.profile_ref}});
  }
  json loads = json::array();
  for (const auto& l : grid.loads) {
    json j{{"id", l.id},
           {"bus", l.bus},
           {"class", to_string(l.load_class)},
           {"installed_kw", l.installed_kw},
           {"power_factor", l.power_factor},
           {"profile_ref", l.profile_ref}};
    if (l.load_class == LoadClass::LvAggregate || l.n_households != 0) j["n_households"] = l.n_households;
    loads.push_back(std::move(j));
  }
  doc["buses"] = std::move(buses);
  doc["branches"] = std::move(branches);
  doc["transformers"] = std::move(trafos);
  doc["generators"] = std::move(gens);
  doc["loads"] = std::move(loads);
  return doc.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

Grid read_grid_file(const std::filesystem::path& path) { return load_grid(read_text_file(path)); }

void write_grid_file(const Grid& grid, const std::filesystem::path& path) {
  write_text_file(path, serialize_grid(grid));
}

}  // namespace gridsim
