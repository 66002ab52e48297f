#include "certkg/ingest/chunker.hpp"

#include "certkg/error.hpp"
#include "certkg/text.hpp"

#include <algorithm>

namespace certkg::ingest {

void ChunkConfig::validate() const {
  if (chunk_size == 0) throw Error(ErrorCode::InvalidConfig, "chunk_size must be positive");
  if (overlap >= chunk_size) {
    throw Error(ErrorCode::InvalidConfig, "overlap must be smaller than chunk_size",
                {{"chunk_size", chunk_size}, {"overlap", overlap}});
  }
}

int JoinedText::page_at(std::size_t byte) const {
  if (pages.empty()) return 0;
  auto it = std::upper_bound(pages.begin(), pages.end(), byte,
                             [](std::size_t b, const PageSpan& p) { return b < p.byte_start; });
  if (it == pages.begin()) return pages.front().page;
  return std::prev(it)->page;
}

JoinedText join_pages(const std::vector<store::PageText>& pages) {
  JoinedText out;
  for (std::size_t i = 0; i < pages.size(); ++i) {
    if (i > 0) out.text.push_back('\n');
    PageSpan span;
    span.page = pages[i].page;
    span.byte_start = out.text.size();
    out.text += pages[i].text;
    span.byte_end = out.text.size();
    out.pages.push_back(span);
  }
  return out;
}

namespace {

std::vector<Chunk> windows(const std::string& text, const ChunkConfig& config,
                           const JoinedText* joined) {
  config.validate();
  const auto offsets = text::code_point_offsets(text);
  const std::size_t length = offsets.size() - 1;
  const std::size_t stride = config.chunk_size - config.overlap;
  std::vector<Chunk> out;
  for (std::size_t start = 0; start < length; start += stride) {
    Chunk c;
    c.index = out.size();
    c.start = start;
    c.end = std::min(start + config.chunk_size, length);
    c.byte_start = offsets[c.start];
    c.byte_end = offsets[c.end];
    c.text = text.substr(c.byte_start, c.byte_end - c.byte_start);
    if (joined != nullptr) {
      c.first_page = joined->page_at(c.byte_start);
      c.last_page = joined->page_at(c.byte_end - 1);
    }
    out.push_back(std::move(c));
    if (out.back().end == length) break;
  }
  return out;
}

}  // namespace

std::vector<Chunk> chunk_text(const std::string& full_text, const ChunkConfig& config) {
  return windows(full_text, config, nullptr);
}

std::vector<Chunk> chunk_document(const JoinedText& joined, const ChunkConfig& config) {
  return windows(joined.text, config, &joined);
}

}  // namespace certkg::ingest
