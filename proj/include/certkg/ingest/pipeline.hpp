#pragma once

#include "certkg/ingest/chunker.hpp"
#include "certkg/ingest/llm.hpp"
#include "certkg/ingest/prompts.hpp"
#include "certkg/ingest/triple_parser.hpp"
#include "certkg/store/graph_store.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace certkg::ingest {

// Intake format: {"title": str, "source_file"?: str, "pages": [{"page": int, "text": str}]}
struct IntakeDocument {
  std::string title;
  std::string source_file;
  std::vector<store::PageText> pages;
};

IntakeDocument parse_intake(const nlohmann::json& j);
IntakeDocument load_intake(const std::filesystem::path& path);

struct IngestConfig {
  ChunkConfig chunk;
  std::optional<store::Standard> standard_override;
  RetryPolicy retry;
  std::string model_id = "default";
  std::size_t snippet_chars = 2000;
  std::string graph_id;  // empty: a new graph named after the document
};

struct IngestWarning {
  std::optional<std::size_t> chunk_index;
  std::string line;
  std::string reason;

  bool operator==(const IngestWarning&) const = default;
};

struct IngestReport {
  std::string document_id;
  store::Standard standard = store::Standard::Unknown;
  std::size_t chunk_count = 0;
  std::size_t chunks_failed = 0;
  std::size_t triples_inserted = 0;
  std::size_t triples_deduped = 0;
  std::size_t lines_skipped = 0;
  std::vector<IngestWarning> warnings;
  double duration_ms = 0;
};

nlohmann::json to_json(const IngestReport& r);
IngestReport report_from_json(const nlohmann::json& j);

struct Identification {
  store::Standard standard = store::Standard::Unknown;
  int attempts = 0;
  std::vector<std::string> responses;
};

// Trim + lowercase the answer; anything outside the four identifiers earns one
// retry, then `unknown`. Transport failures propagate as LlmUnavailable.
Identification identify_standard(std::string_view snippet, LlmClient& llm, const PromptRegistry& prompts,
                                 const std::string& model_id, const RetryPolicy& retry);

struct ChunkExtraction {
  std::vector<RawTriple> triples;
  std::vector<LineIssue> skipped;
  std::vector<IngestWarning> warnings;
  bool failed = false;
};

ChunkExtraction extract_chunk(const Chunk& chunk, const PromptPair& prompt, LlmClient& llm,
                              const std::string& model_id, const RetryPolicy& retry);

struct IngestProgress {
  std::string document_id;
  std::size_t chunks_done = 0;
  std::size_t chunk_count = 0;
};
using ProgressFn = std::function<void(const IngestProgress&)>;

// Registers the document (Ingesting), identifies, chunks, extracts, aligns
// evidence, inserts, stores the report, and moves the document to Draft.
// Role checks are the caller's job.
IngestReport ingest_document(const IntakeDocument& doc, const IngestConfig& config,
                             const PromptRegistry& prompts, LlmClient& llm, store::GraphStore& store,
                             const std::string& actor, const ProgressFn& progress = {});

// First half of ingest_document, for callers that run the rest asynchronously.
store::DocumentRecord register_intake(const IntakeDocument& doc, const IngestConfig& config,
                                      store::GraphStore& store, const std::string& actor);
IngestReport run_ingestion(const std::string& document_id, const IngestConfig& config,
                           const PromptRegistry& prompts, LlmClient& llm, store::GraphStore& store,
                           const std::string& actor, const ProgressFn& progress = {});

}  // namespace certkg::ingest
