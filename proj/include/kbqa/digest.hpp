#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace kbqa::util {

/// SHA-256 of a byte string, as lowercase hex.
std::string sha256_hex(std::string_view data);

/// SHA-256 of a file's contents, as lowercase hex.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace kbqa::util
