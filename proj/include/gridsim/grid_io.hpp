#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "gridsim/grid.hpp"

namespace gridsim {

/// Parses a `gridsim-ev/1` JSON document.
///
/// Throws ParseError for malformed JSON (with byte offset), missing or
/// mistyped fields, and a wrong `format` tag. Throws ValidationError for
/// duplicate ids, references to unknown buses, and branches joining buses of
/// different nominal voltage. No other normalization is applied.
Grid load_grid(std::string_view document);

/// Canonical serialization: keys sorted, two-space indent, trailing newline.
std::string serialize_grid(const Grid& grid);

Grid read_grid_file(const std::filesystem::path& path);
void write_grid_file(const Grid& grid, const std::filesystem::path& path);

/// Whole-file read/write helpers shared by the other file formats.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace gridsim
