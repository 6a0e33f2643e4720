#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace inkline::io {

// Throws Error "io.read" with the path in detail.
std::string read_text(const std::filesystem::path& file);

// Writes through a sibling temp file and renames; creates parent directories.
void write_text(const std::filesystem::path& file, std::string_view content);

} // namespace inkline::io
