#include "certkg/service/export.hpp"

#include "certkg/error.hpp"

namespace certkg::service {

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string edges_to_csv(const std::vector<store::EdgeRow>& rows) {
  std::string out = "triple_id,subject,predicate,object,document_id,page,status\r\n";
  for (const auto& r : rows) {
    out += csv_field(r.triple_id) + ',' + csv_field(r.subject) + ',' + csv_field(r.predicate) + ',' +
           csv_field(r.object) + ',' + csv_field(r.document_id) + ',' + (r.page ? std::to_string(*r.page) : "") +
           ',' + std::string(store::to_string(r.status)) + "\r\n";
  }
  return out;
}

std::string edges_to_jsonl(const std::vector<store::EdgeRow>& rows) {
  std::string out;
  for (const auto& r : rows) out += nlohmann::json(r).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + '\n';
  return out;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  std::size_t i = 0;
  bool row_open = false;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
  };
  while (i < text.size()) {
    row_open = true;
    if (text[i] == '"') {
      ++i;
      for (;;) {
        if (i >= text.size()) throw Error(ErrorCode::InvalidArgument, "csv: unterminated quoted field");
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field += '"';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        field += text[i++];
      }
      if (i < text.size() && text[i] != ',' && text[i] != '\r') {
        throw Error(ErrorCode::InvalidArgument, "csv: text after closing quote");
      }
    } else {
      while (i < text.size() && text[i] != ',' && text[i] != '\r' && text[i] != '\n') field += text[i++];
      if (i < text.size() && text[i] == '\n') throw Error(ErrorCode::InvalidArgument, "csv: bare LF line end");
    }
    end_field();
    if (i < text.size() && text[i] == ',') {
      ++i;
      if (i == text.size()) end_field();
      continue;
    }
    if (i < text.size()) {
      if (i + 1 >= text.size() || text[i + 1] != '\n') throw Error(ErrorCode::InvalidArgument, "csv: bare CR");
      i += 2;
    }
    rows.push_back(std::move(row));
    row.clear();
    row_open = false;
  }
  if (row_open) rows.push_back(std::move(row));
  return rows;
}

}  // namespace certkg::service
