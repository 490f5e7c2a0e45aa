#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "gridsim/grid.hpp"

namespace gridsim {

/// One row of the conductor inventory the synthesizer reproduces.
struct ConductorRow {
  double cross_section_mm2;
  Material material;
  double total_length_km;
  int quantity;
};

struct RatingCount {
  double rating_kva;
  int quantity;
};

struct GeneratorFleetRow {
  GeneratorKind kind;
  double total_kva;
  int quantity;
};

/// Inventory of the reference network. The 150 mm2 row of the published
/// table mixes AL and CU; it is split into two rows whose counts and
/// lengths add back up to the published row.
namespace reference {

inline constexpr int kFeeders = 7;
inline constexpr double kHvKv = 132.0;
inline constexpr double kMvKv = 15.0;
inline constexpr double kLvKv = 0.4;
inline constexpr double kPrimaryRatingKva = 40000.0;
inline constexpr double kPrimaryV2Kv = 15.6;
inline constexpr int kMvCustomers = 38;
inline constexpr double kMvInstalledKw = 27700.0;
inline constexpr int kProsumers = 13;
inline constexpr double kProsumerInstalledKw = 13300.0;
inline constexpr int kHouseholds = 10000;
inline constexpr double kInstalledKwPerHousehold = 3.0;
inline constexpr int kBranchTotal = 178;
inline constexpr double kMvPowerFactor = 0.99;
inline constexpr double kLvPowerFactor = 0.83;

std::span<const RatingCount> distribution_transformers();
std::span<const RatingCount> generator_transformers();
std::span<const ConductorRow> conductors();
std::span<const GeneratorFleetRow> generator_fleet();

/// The one branch beyond the published per-row inventory, which sums to one
/// fewer than the stated branch total.
ConductorRow residual_conductor();

/// Feeder trunk bus id, 1-based feeder and position (e.g. "F2-T10").
std::string trunk_bus_id(int feeder, int position);

}  // namespace reference

/// Resistance per km from resistivity and cross-section.
double conductor_resistance_ohm_per_km(double cross_section_mm2, Material material);
/// 0.11 ohm/km for cable sizes (>= 95 mm2), 0.35 ohm/km for overhead sizes.
double conductor_reactance_ohm_per_km(double cross_section_mm2);
double conductor_ampacity_a(double cross_section_mm2, Material material);

/// Deterministically builds the reference network for `seed`.
Grid synthesize_reference_grid(std::uint64_t seed);

}  // namespace gridsim
