#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace normprobe::cli {

// Whole-file read; DataError naming the path on failure.
std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over the target, so
// readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Creates the directory if needed and checks that files can be created in it.
// Throws ConfigError otherwise.
void ensure_writable_dir(const std::filesystem::path& dir);

}  // namespace normprobe::cli
