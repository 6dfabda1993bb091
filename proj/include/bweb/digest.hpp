#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace bweb {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

}  // namespace bweb
