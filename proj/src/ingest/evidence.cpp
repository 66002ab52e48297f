#include "certkg/ingest/evidence.hpp"

#include "certkg/text.hpp"

namespace certkg::ingest {
namespace {

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

void push_trimmed(std::vector<SentenceSpan>& out, std::string_view text, std::size_t b, std::size_t e) {
  while (b < e && is_ws(text[b])) ++b;
  while (e > b && is_ws(text[e - 1])) --e;
  if (b < e) out.push_back({b, e});
}

}  // namespace

std::vector<SentenceSpan> split_sentences(std::string_view text) {
  std::vector<SentenceSpan> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      push_trimmed(out, text, start, i);
      start = i + 1;
    } else if ((c == '.' || c == '?' || c == '!') && i + 1 < text.size() && is_ws(text[i + 1])) {
      push_trimmed(out, text, start, i + 1);
      start = i + 1;
    }
  }
  push_trimmed(out, text, start, text.size());
  return out;
}

std::optional<Evidence> align_evidence(const RawTriple& triple, const Chunk& chunk,
                                       const JoinedText& joined) {
  const auto spans = split_sentences(chunk.text);
  const SentenceSpan* subject_only = nullptr;
  const SentenceSpan* both = nullptr;
  for (const auto& s : spans) {
    std::string_view sentence(chunk.text.data() + s.byte_start, s.byte_end - s.byte_start);
    if (!text::icontains(sentence, triple.subject)) continue;
    if (subject_only == nullptr) subject_only = &s;
    if (text::icontains(sentence, triple.object)) {
      both = &s;
      break;
    }
  }
  const SentenceSpan* pick = both != nullptr ? both : subject_only;
  if (pick == nullptr) return std::nullopt;
  Evidence ev;
  ev.sentence = chunk.text.substr(pick->byte_start, pick->byte_end - pick->byte_start);
  if (!joined.pages.empty()) ev.page = joined.page_at(chunk.byte_start + pick->byte_start);
  return ev;
}

}  // namespace certkg::ingest
