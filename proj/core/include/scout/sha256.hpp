#pragma once

#include <cstdint>
#include <string>

namespace scout {

//! Hex SHA-256 digest of a byte string (FIPS 180-4).
std::string sha256_hex(const std::string& bytes);

//! Hex SHA-256 digest of a file's contents.
std::string sha256_file(const std::string& path);

}  // namespace scout
