#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace qprobe {

/// Writes to a sibling temp file and renames it over `path`. Throws Error on
/// failure (including a missing parent directory).
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

/// printf("%.17g"): reads back to the identical double.
std::string exact(double x);

} // namespace qprobe
