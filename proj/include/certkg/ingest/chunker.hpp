#pragma once

#include "certkg/store/model.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace certkg::ingest {

// Sizes count Unicode code points.
struct ChunkConfig {
  std::size_t chunk_size = 4000;
  std::size_t overlap = 200;

  void validate() const;  // InvalidConfig unless 0 < chunk_size and overlap < chunk_size
};

struct PageSpan {
  int page = 0;
  std::size_t byte_start = 0;
  std::size_t byte_end = 0;  // exclusive, excludes the "\n" separator
};

// Pages concatenated with a single "\n" between them, plus the offset table
// that maps any byte of the joined text back to its page.
struct JoinedText {
  std::string text;
  std::vector<PageSpan> pages;

  // Page owning `byte`; a separator byte belongs to the page before it.
  int page_at(std::size_t byte) const;
};

JoinedText join_pages(const std::vector<store::PageText>& pages);

struct Chunk {
  std::size_t index = 0;
  std::size_t start = 0;  // code points
  std::size_t end = 0;    // exclusive; end - start == code point length of text
  std::string text;
  std::size_t byte_start = 0;
  std::size_t byte_end = 0;
  int first_page = 0;  // 0 when no page table is available
  int last_page = 0;
};

std::vector<Chunk> chunk_text(const std::string& full_text, const ChunkConfig& config);
std::vector<Chunk> chunk_document(const JoinedText& joined, const ChunkConfig& config);

}  // namespace certkg::ingest
