#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace refeval::csv {

/// Parses RFC 4180 CSV text: quoted fields may contain commas, doubled
/// quotes, and embedded line breaks. Accepts both LF and CRLF rows.
std::vector<std::vector<std::string>> parse(std::string_view content);

std::vector<std::vector<std::string>> parse_file(const std::filesystem::path& path);

/// Quotes a field when it contains a comma, quote, or line break.
std::string escape_field(std::string_view field);

std::string format_row(const std::vector<std::string>& fields);

}  // namespace refeval::csv
