#pragma once

#include "certkg/store/model.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace certkg::service {

// RFC-4180: CRLF line ends; a field is quoted when it holds a comma, quote,
// CR or LF, and embedded quotes are doubled.
std::string csv_field(std::string_view value);
std::string edges_to_csv(const std::vector<store::EdgeRow>& rows);
std::string edges_to_jsonl(const std::vector<store::EdgeRow>& rows);

// Inverse of edges_to_csv for round-trip checks; InvalidArgument on malformed input.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace certkg::service
