#include "certkg/ingest/triple_parser.hpp"

#include "certkg/text.hpp"

namespace certkg::ingest {
namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) { return c == ' ' || c == '\t'; }

// Drops one leading list marker ("-", "*", "•", "+", "12.", "3)") and the
// whitespace after it. A marker without following whitespace is kept.
std::string_view strip_marker(std::string_view s) {
  std::size_t n = 0;
  if (s.starts_with("\xE2\x80\xA2")) {
    n = 3;
  } else if (!s.empty() && (s[0] == '-' || s[0] == '*' || s[0] == '+')) {
    n = 1;
  } else {
    while (n < s.size() && is_digit(s[n])) ++n;
    if (n == 0 || n >= s.size() || (s[n] != '.' && s[n] != ')')) return s;
    ++n;
  }
  if (n >= s.size() || !is_space(s[n])) return s;
  while (n < s.size() && is_space(s[n])) ++n;
  return s.substr(n);
}

}  // namespace

ParseResult parse_triple_lines(std::string_view output, std::size_t chunk_index) {
  ParseResult result;
  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos <= output.size()) {
    std::size_t nl = output.find('\n', pos);
    if (nl == std::string_view::npos) nl = output.size();
    std::string_view raw = output.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_number;

    const std::string line = text::trim(raw);
    if (line.empty()) continue;
    std::string_view body = strip_marker(line);
    const std::size_t close = body.rfind(')');
    if (body.empty() || body.front() != '(' || close == std::string_view::npos || close == 0) {
      result.skipped.push_back({line_number, line, "no_parens"});
      continue;
    }
    const std::string_view trailing = body.substr(close + 1);
    body = body.substr(1, close - 1);

    const std::size_t c1 = body.find(',');
    const std::size_t c2 = c1 == std::string_view::npos ? c1 : body.find(',', c1 + 1);
    if (c2 == std::string_view::npos) {
      result.skipped.push_back({line_number, line, "too_few_fields"});
      continue;
    }
    RawTriple t;
    t.subject = text::collapse_whitespace(body.substr(0, c1));
    t.predicate = text::collapse_whitespace(body.substr(c1 + 1, c2 - c1 - 1));
    t.object = text::collapse_whitespace(body.substr(c2 + 1));
    t.source_chunk = chunk_index;
    if (t.subject.empty() || t.predicate.empty() || t.object.empty()) {
      result.skipped.push_back({line_number, line, "empty_field"});
      continue;
    }
    if (!text::trim(trailing).empty()) {
      result.warnings.push_back({line_number, line, "trailing_text"});
    }
    result.triples.push_back(std::move(t));
  }
  return result;
}

std::string format_triple(const RawTriple& t) {
  return "(" + t.subject + ", " + t.predicate + ", " + t.object + ")";
}

}  // namespace certkg::ingest
