#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace suitmap {

// Writes to a sibling temp file, then renames over `path`; no partial file
// is left behind on failure.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

// Shortest decimal form that parses back to the same double.
std::string format_roundtrip(double v);
std::string format_fixed6(double v);

}  // namespace suitmap
