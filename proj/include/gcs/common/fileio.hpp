#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace gcs {

// Writes to a sibling temporary file and renames it over `path`, so readers never see a partial file.
void atomic_write_file(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace gcs
