#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace envlab::detail {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Write to a temporary sibling then rename over path.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Shortest round-trip decimal form ("%.17g").
std::string format_double(double value);

}  // namespace envlab::detail
