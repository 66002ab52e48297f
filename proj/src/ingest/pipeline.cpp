#include "certkg/ingest/pipeline.hpp"

#include "certkg/error.hpp"
#include "certkg/ingest/evidence.hpp"
#include "certkg/text.hpp"

#include <fstream>

namespace certkg::ingest {

using nlohmann::json;
using store::Standard;

IntakeDocument parse_intake(const json& j) {
  IntakeDocument d;
  try {
    d.title = j.at("title").get<std::string>();
    d.source_file = j.value("source_file", "");
    for (const auto& p : j.at("pages")) {
      d.pages.push_back(store::PageText{p.at("page").get<int>(), p.at("text").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed intake document: ") + e.what());
  }
  return d;
}

IntakeDocument load_intake(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read intake " + path.string());
  try {
    return parse_intake(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("intake is not JSON: ") + e.what());
  }
}

json to_json(const IngestReport& r) {
  json warnings = json::array();
  for (const auto& w : r.warnings) {
    warnings.push_back({{"chunk_index", w.chunk_index ? json(*w.chunk_index) : json(nullptr)},
                        {"line", w.line},
                        {"reason", w.reason}});
  }
  return json{{"document_id", r.document_id},
              {"standard", store::to_string(r.standard)},
              {"chunk_count", r.chunk_count},
              {"chunks_failed", r.chunks_failed},
              {"triples_inserted", r.triples_inserted},
              {"triples_deduped", r.triples_deduped},
              {"lines_skipped", r.lines_skipped},
              {"warnings", warnings},
              {"duration_ms", r.duration_ms}};
}

IngestReport report_from_json(const json& j) {
  IngestReport r;
  r.document_id = j.at("document_id").get<std::string>();
  r.standard = store::parse_standard(j.at("standard").get<std::string>()).value_or(Standard::Unknown);
  r.chunk_count = j.at("chunk_count").get<std::size_t>();
  r.chunks_failed = j.value("chunks_failed", std::size_t{0});
  r.triples_inserted = j.at("triples_inserted").get<std::size_t>();
  r.triples_deduped = j.at("triples_deduped").get<std::size_t>();
  r.lines_skipped = j.at("lines_skipped").get<std::size_t>();
  for (const auto& w : j.at("warnings")) {
    IngestWarning iw;
    if (!w.at("chunk_index").is_null()) iw.chunk_index = w.at("chunk_index").get<std::size_t>();
    iw.line = w.at("line").get<std::string>();
    iw.reason = w.at("reason").get<std::string>();
    r.warnings.push_back(std::move(iw));
  }
  r.duration_ms = j.value("duration_ms", 0.0);
  return r;
}

Identification identify_standard(std::string_view snippet, LlmClient& llm, const PromptRegistry& prompts,
                                 const std::string& model_id, const RetryPolicy& retry) {
  LlmRequest req{model_id, prompts.get("identification"), std::string(snippet), 0.0};
  Identification out;
  for (int attempt = 0; attempt < 2; ++attempt) {
    ++out.attempts;
    const std::string answer = text::ascii_lower(text::trim(complete_with_retry(llm, req, retry).text));
    out.responses.push_back(answer);
    const auto s = store::parse_standard(answer);
    if (s && *s != Standard::Unknown) {
      out.standard = *s;
      return out;
    }
  }
  return out;
}

ChunkExtraction extract_chunk(const Chunk& chunk, const PromptPair& prompt, LlmClient& llm,
                              const std::string& model_id, const RetryPolicy& retry) {
  ChunkExtraction out;
  LlmRequest req{model_id, prompt.system, prompt.render_user(chunk.text), 0.0};
  std::string text;
  try {
    text = complete_with_retry(llm, req, retry).text;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::LlmUnavailable) throw;
    out.failed = true;
    out.warnings.push_back({chunk.index, e.what(), "chunk_failed"});
    return out;
  }
  if (text::trim(text).empty()) {
    out.warnings.push_back({chunk.index, "", "empty_response"});
    return out;
  }
  ParseResult parsed = parse_triple_lines(text, chunk.index);
  out.triples = std::move(parsed.triples);
  out.skipped = std::move(parsed.skipped);
  for (const auto& s : out.skipped) out.warnings.push_back({chunk.index, s.line, s.reason});
  for (const auto& w : parsed.warnings) out.warnings.push_back({chunk.index, w.line, w.reason});
  return out;
}

store::DocumentRecord register_intake(const IntakeDocument& doc, const IngestConfig& config,
                                      store::GraphStore& store, const std::string& actor) {
  const bool has_text = std::any_of(doc.pages.begin(), doc.pages.end(),
                                    [](const store::PageText& p) { return !text::trim(p.text).empty(); });
  if (!has_text) throw Error(ErrorCode::EmptyDocument, "document has no page text");
  config.chunk.validate();
  int last_page = 0;
  for (const auto& p : doc.pages) {
    if (p.page <= last_page) throw Error(ErrorCode::InvalidArgument, "page numbers must be positive and strictly increasing");
    last_page = p.page;
  }
  // A named graph that does not exist yet is created in the same transaction.
  return store.write([&](store::GraphStore::Writer& w) {
    if (!config.graph_id.empty() && !w.state().graphs.contains(config.graph_id)) w.create_graph(config.graph_id, actor);
    return w.register_document(config.graph_id, doc.title, doc.pages, actor, doc.source_file);
  });
}

IngestReport run_ingestion(const std::string& document_id, const IngestConfig& config,
                           const PromptRegistry& prompts, LlmClient& llm, store::GraphStore& store,
                           const std::string& actor, const ProgressFn& progress) {
  const auto started = std::chrono::steady_clock::now();
  const store::DocumentRecord doc = store.get_document(document_id);
  IngestReport report;
  report.document_id = document_id;

  if (config.standard_override) {
    report.standard = *config.standard_override;
  } else {
    auto page = std::find_if(doc.pages.begin(), doc.pages.end(),
                             [](const store::PageText& p) { return !text::trim(p.text).empty(); });
    const std::string& first_page = page->text;
    const auto offsets = text::code_point_offsets(first_page);
    const std::size_t cut = offsets[std::min(config.snippet_chars, offsets.size() - 1)];
    try {
      const Identification id = identify_standard(std::string_view(first_page).substr(0, cut), llm, prompts,
                                                  config.model_id, config.retry);
      report.standard = id.standard;
      if (id.standard == Standard::Unknown) {
        report.warnings.push_back({std::nullopt, id.responses.back(), "unidentified_standard"});
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::LlmUnavailable) throw;
      report.warnings.push_back({std::nullopt, e.what(), "identification_failed"});
    }
  }
  store.write([&](store::GraphStore::Writer& w) { w.set_document_standard(document_id, report.standard, actor); });

  const PromptPair prompt = select_prompt(report.standard, prompts);
  const JoinedText joined = join_pages(doc.pages);
  const std::vector<Chunk> chunks = chunk_document(joined, config.chunk);
  report.chunk_count = chunks.size();
  if (progress) progress({document_id, 0, chunks.size()});

  for (const Chunk& chunk : chunks) {
    ChunkExtraction ex = extract_chunk(chunk, prompt, llm, config.model_id, config.retry);
    if (ex.failed) ++report.chunks_failed;
    report.lines_skipped += ex.skipped.size();
    for (auto& w : ex.warnings) report.warnings.push_back(std::move(w));
    store.write([&](store::GraphStore::Writer& w) {
      for (const RawTriple& t : ex.triples) {
        store::Provenance p;
        p.document_id = document_id;
        p.chunk_index = static_cast<int>(chunk.index);
        if (auto ev = align_evidence(t, chunk, joined)) {
          p.evidence_sentence = ev->sentence;
          p.page = ev->page;
        }
        const auto r = w.insert_triple(doc.graph_id, t.subject, t.predicate, t.object, p, actor,
                                       store::Origin::LlmExtraction);
        ++(r.inserted ? report.triples_inserted : report.triples_deduped);
      }
    });
    if (progress) progress({document_id, chunk.index + 1, chunks.size()});
  }

  report.duration_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  // Wall time stays out of the event log so replays stay byte-comparable.
  json stored = to_json(report);
  stored.erase("duration_ms");
  store.write([&](store::GraphStore::Writer& w) {
    w.set_document_report(document_id, stored, actor);
    w.set_document_state(document_id, store::DocumentState::Draft, actor);
  });
  return report;
}

IngestReport ingest_document(const IntakeDocument& doc, const IngestConfig& config, const PromptRegistry& prompts,
                             LlmClient& llm, store::GraphStore& store, const std::string& actor,
                             const ProgressFn& progress) {
  const auto record = register_intake(doc, config, store, actor);
  return run_ingestion(record.id, config, prompts, llm, store, actor, progress);
}

}  // namespace certkg::ingest
