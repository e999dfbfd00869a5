#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mapkit {

/// Formats a double with 17 significant digits. Integral values keep a
/// trailing ".0" so the column still reads as floating point.
[[nodiscard]] std::string format_real(double value);

// Comma-separated lists such as "1,2,4,8,16".
[[nodiscard]] std::vector<std::int64_t> parse_int_list(std::string_view text);

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);

/// Writes via a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace mapkit
