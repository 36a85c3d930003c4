#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace drsim::text {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Parses a complete decimal field (surrounding blanks allowed).
std::optional<double> parse_double(std::string_view field);
std::optional<long> parse_int(std::string_view field);

std::string_view trim(std::string_view s);

/// Splits one CSV line on commas. Double-quoted fields may contain commas;
/// a doubled quote inside a quoted field is a literal quote.
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace drsim::text
