#pragma once

#include <string>

namespace gfuse {

// FIPS 180-4 SHA-256, hex-encoded. Used for content hashes in run manifests.
std::string sha256_hex(const void* data, size_t len);
std::string sha256_hex(const std::string& data);
std::string sha256_file_hex(const std::string& path);

}  // namespace gfuse
