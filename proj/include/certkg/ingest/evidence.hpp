#pragma once

#include "certkg/ingest/chunker.hpp"
#include "certkg/ingest/triple_parser.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace certkg::ingest {

struct SentenceSpan {
  std::size_t byte_start = 0;  // relative to the split text, trimmed
  std::size_t byte_end = 0;
};

// Boundaries: ".", "?" or "!" followed by whitespace (the mark stays with the
// sentence), and every newline. Empty spans are dropped.
std::vector<SentenceSpan> split_sentences(std::string_view text);

struct Evidence {
  std::string sentence;
  std::optional<int> page;
};

// First sentence containing both subject and object (ASCII case-insensitive),
// else the first containing the subject, else nothing.
std::optional<Evidence> align_evidence(const RawTriple& triple, const Chunk& chunk,
                                       const JoinedText& joined);

}  // namespace certkg::ingest
