#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace certkg {

inline constexpr std::string_view kDigestAlgorithm = "sha256";

std::string sha256_hex(std::string_view data);

// Hex string of `bytes` cryptographically random bytes.
std::string random_hex(std::size_t bytes);

}  // namespace certkg
