#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace certkg::ingest {

struct RawTriple {
  std::string subject;
  std::string predicate;
  std::string object;
  std::size_t source_chunk = 0;

  bool operator==(const RawTriple&) const = default;
};

// One rejected or suspicious line. `reason` is one of no_parens,
// too_few_fields, empty_field (skips) or trailing_text (kept, warned).
struct LineIssue {
  std::size_t line_number = 0;  // 1-based within the parsed output
  std::string line;
  std::string reason;
};

struct ParseResult {
  std::vector<RawTriple> triples;
  std::vector<LineIssue> skipped;
  std::vector<LineIssue> warnings;
};

// Total: never throws. Blank lines are ignored.
ParseResult parse_triple_lines(std::string_view llm_output, std::size_t chunk_index = 0);

// "(subject, predicate, object)"
std::string format_triple(const RawTriple& t);

}  // namespace certkg::ingest
