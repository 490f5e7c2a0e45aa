#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gridsim {

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

/// Fixed number of significant digits, e.g. format_significant(83.871, 4) == "83.87".
std::string format_significant(double v, int digits);

/// Splits one CSV line on commas; no quoting support.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace gridsim
