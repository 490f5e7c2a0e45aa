#pragma once

#include <string>
#include <vector>

#include "gridsim/grid.hpp"

namespace gridsim {

struct Violation {
  std::string code;     ///< stable machine-readable key, e.g. "feeder_not_radial"
  std::string message;  ///< human-readable text naming the offending ids
  std::vector<std::string> ids;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(const std::string& code) const;
  std::string to_string() const;
};

/// Checks every structural and per-element invariant of a Grid. Never throws.
ValidationReport validate_grid(const Grid& grid);

}  // namespace gridsim
