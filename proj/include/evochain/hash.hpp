#pragma once

#include <string>
#include <string_view>

namespace evochain {

inline constexpr std::string_view kDigestAlgorithm = "sha-256";
inline constexpr std::size_t kDigestHexLength = 64;

// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

}  // namespace evochain
