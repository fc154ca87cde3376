#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rflab::io {

/// Shortest decimal text that parses back to exactly `x`.
std::string format_real(double x);
double parse_real(std::string_view text);

std::vector<std::string> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

/// Writes `content` to `path` via a temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace rflab::io
