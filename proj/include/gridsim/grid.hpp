#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gridsim {

inline constexpr std::string_view kGridFormat = "gridsim-ev/1";

enum class BusKind { Slack, Pq };
enum class Material { AL, AC, CU };
enum class TransformerRole { Primary, Distribution, GeneratorStepUp };
enum class GeneratorKind { SI, AS, ST };
enum class LoadClass { MvCustomer, LvAggregate };

struct Bus {
  std::string id;
  double nominal_kv = 0.0;
  BusKind kind = BusKind::Pq;
  std::optional<std::string> feeder_id;

  bool operator==(const Bus&) const = default;
};

struct Branch {
  std::string id;
  std::string from_bus;
  std::string to_bus;
  double length_km = 0.0;
  double cross_section_mm2 = 0.0;
  Material material = Material::AL;
  double r_ohm_per_km = 0.0;
  double x_ohm_per_km = 0.0;
  double ampacity_a = 0.0;

  bool operator==(const Branch&) const = default;
};

struct Transformer {
  std::string id;
  std::string hv_bus;
  std::string lv_bus;
  double rating_kva = 0.0;
  double v1_kv = 0.0;
  double v2_kv = 0.0;
  double uk_percent = 0.0;
  double load_loss_kw = 0.0;
  TransformerRole role = TransformerRole::Distribution;

  bool operator==(const Transformer&) const = default;
};

struct Generator {
  std::string id;
  std::string bus;
  GeneratorKind kind = GeneratorKind::ST;
  double rated_kva = 0.0;
  double power_factor = 1.0;
  std::string profile_ref;

  bool operator==(const Generator&) const = default;
};

struct LoadPoint {
  std::string id;
  std::string bus;
  LoadClass load_class = LoadClass::MvCustomer;
  double installed_kw = 0.0;
  int n_households = 0;
  double power_factor = 1.0;
  std::string profile_ref;

  bool operator==(const LoadPoint&) const = default;
};

struct Grid {
  std::string name;
  double base_mva = 10.0;
  /// Allowed relative deviation of transformer winding voltages from the
  /// nominal voltage of the bus they attach to.
  double tap_tolerance_percent = 5.0;
  /// Synthesis seed, when the grid came from the reference synthesizer.
  std::optional<long long> seed;

  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Transformer> transformers;
  std::vector<Generator> generators;
  std::vector<LoadPoint> loads;

  bool operator==(const Grid&) const = default;

  /// Index of the bus with the given id, or -1.
  int bus_index(std::string_view id) const;
  const Bus* find_bus(std::string_view id) const;
  /// Index of the single slack bus, or -1 when there is none.
  int slack_index() const;
};

/// Lookup table from bus id to position in Grid::buses.
std::unordered_map<std::string, int> bus_index_map(const Grid& grid);

std::string_view to_string(BusKind v);
std::string_view to_string(Material v);
std::string_view to_string(TransformerRole v);
std::string_view to_string(GeneratorKind v);
std::string_view to_string(LoadClass v);

std::optional<BusKind> parse_bus_kind(std::string_view s);
std::optional<Material> parse_material(std::string_view s);
std::optional<TransformerRole> parse_transformer_role(std::string_view s);
std::optional<GeneratorKind> parse_generator_kind(std::string_view s);
std::optional<LoadClass> parse_load_class(std::string_view s);

/// Copy of `grid` with every load's installed_kw multiplied by `factor`.
Grid scale_demand(const Grid& grid, double factor);

/// Ids of all buses at the given nominal voltage.
std::vector<std::string> buses_at_kv(const Grid& grid, double kv);

}  // namespace gridsim
