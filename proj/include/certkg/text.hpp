#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace certkg::text {

std::string trim(std::string_view s);

// Trims and collapses internal runs of ASCII whitespace to one space.
std::string collapse_whitespace(std::string_view s);

// ASCII-only lowercase; bytes >= 0x80 pass through untouched.
std::string ascii_lower(std::string_view s);

bool icontains(std::string_view haystack, std::string_view needle);

// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD, one per byte.
std::vector<char32_t> decode_utf8(std::string_view s);
std::string encode_utf8(const std::vector<char32_t>& cps);
void append_utf8(std::string& out, char32_t cp);

// Byte offset of every code point start, plus a final entry equal to s.size().
std::vector<std::size_t> code_point_offsets(std::string_view s);

std::size_t code_point_length(std::string_view s);

}  // namespace certkg::text
