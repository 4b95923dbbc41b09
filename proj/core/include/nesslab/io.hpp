#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nesslab {

/// Shortest decimal text that parses back to the same binary64 value.
std::string format_double(double v);
double parse_double(std::string_view text);

/// Comma-separated rows with a header line; cells are pre-formatted.
std::string csv_text(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows);

/// Writes through a temporary file in the same directory and renames it
/// into place.
void atomic_write(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace nesslab
