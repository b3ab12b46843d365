#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace holomera {

/// Single-file container: magic + JSON manifest + raw little-endian doubles.
/// Doubles round-trip bit-exactly (written via memcpy of IEEE754 bits).
void write_blob_file(const std::string& path, const nlohmann::json& manifest,
                     const std::vector<double>& payload);
std::pair<nlohmann::json, std::vector<double>> read_blob_file(const std::string& path);

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& s);
std::string sha256_file_hex(const std::string& path);

} // namespace holomera
