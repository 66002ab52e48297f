#pragma once

#include "certkg/ingest/llm.hpp"
#include "certkg/ingest/prompts.hpp"
#include "certkg/store/graph_store.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace certkg::tasks {

inline constexpr int kMaxTaskHops = 4;

const std::set<std::string>& stop_words();

// Normalized tokens minus stop words, then bigrams of adjacent surviving
// tokens; first occurrence wins.
std::vector<std::string> extract_keywords(std::string_view question);

struct EntityMatch {
  std::string entity;
  int score = 0;
  bool operator==(const EntityMatch&) const = default;
};

// Per keyword: 2 when its normalized form equals the entity's, else 1 when it
// is a case-insensitive substring of the name. Descending score, then name.
std::vector<EntityMatch> match_entities(const store::StoreState& state, const std::vector<std::string>& keywords,
                                        const std::string& graph_id);

struct KgqaOptions {
  int hops = 2;
  std::size_t top_k = 5;
  std::size_t edge_cap = store::kDefaultEdgeCap;
  std::size_t max_paths = 5;
};

struct KgqaResult {
  std::vector<std::string> keywords;
  std::vector<EntityMatch> matched_entities;
  std::optional<std::string> answer;
  std::optional<std::string> answer_error;  // set when the model was asked but failed
  std::vector<store::Path> reasoning_paths;
  store::Subgraph evidence_subgraph;
  std::vector<store::Provenance> provenance;  // parallel to evidence_subgraph.edges
};
nlohmann::json to_json(const KgqaResult& r);

// Symbolic retrieval only; `answer` stays empty.
KgqaResult kgqa_retrieve(const store::StoreState& state, const std::string& question, const std::string& graph_id,
                         const KgqaOptions& options);

struct KgqaLlm {
  ingest::LlmClient* client = nullptr;
  const ingest::PromptRegistry* prompts = nullptr;
  std::string model_id = "default";
};

// The model call happens after the read snapshot is released.
KgqaResult kgqa(const store::GraphStore& store, const std::string& question, const std::string& graph_id,
                const KgqaOptions& options, const std::optional<KgqaLlm>& llm);
ingest::LlmRequest kgqa_request(const KgqaResult& symbolic, const std::string& question, const KgqaLlm& llm);

store::Subgraph bounded_hop(const store::GraphStore& store, const std::string& graph_id, const std::string& entity,
                            int hops, const store::EdgeFilter& filter = {},
                            std::size_t edge_cap = store::kDefaultEdgeCap);
std::vector<store::Path> path_search(const store::GraphStore& store, const std::string& graph_id,
                                     const std::string& source, const std::string& target, int max_hops,
                                     std::size_t max_paths = 10);

struct ComparisonReport {
  std::vector<std::string> entities;
  std::map<std::string, std::size_t> fact_counts;
  std::set<std::string> shared_predicates;
  std::map<std::string, std::set<std::string>> unique_predicates;
};
nlohmann::json to_json(const ComparisonReport& r);
ComparisonReport compare_entities(const store::StoreState& state, const std::string& graph_id,
                                  const std::vector<std::string>& entities);

struct DuplicatePair {
  std::string name_a;
  std::string name_b;
  std::string reason;  // normalized_equal | edit_distance
  std::size_t distance = 0;
  bool operator==(const DuplicatePair&) const = default;
};
std::size_t edit_distance(std::string_view a, std::string_view b);  // code points
std::vector<DuplicatePair> detect_duplicates(const store::StoreState& state, const std::string& graph_id,
                                             std::size_t max_edit_distance = 2);
nlohmann::json to_json(const std::vector<DuplicatePair>& pairs);

struct Topic {
  std::string name;
  std::vector<std::string> keywords;
};
using Checklist = std::vector<Topic>;
Checklist default_checklist(store::Standard standard);
// Standard of the graph's first identified document, else the generic list.
Checklist checklist_for_graph(const store::StoreState& state, const std::string& graph_id);
Checklist checklist_from_json(const nlohmann::json& j);

struct GapReport {
  std::vector<std::string> missing_topics;
  std::vector<std::string> thin_topics;
  std::map<std::string, std::size_t> topic_hits;
  std::vector<std::string> degree_one_entities;
};
nlohmann::json to_json(const GapReport& r);
GapReport coverage_gaps(const store::StoreState& state, const std::string& graph_id, const Checklist& checklist);

const std::set<std::string>& generic_subject_terms();

struct DiagnosticsReport {
  std::map<std::string, std::set<std::string>> predicate_variants;  // folded -> raw spellings
  std::vector<std::string> singleton_predicates;
  std::vector<std::pair<std::string, std::string>> generic_subjects;  // triple id, subject
};
nlohmann::json to_json(const DiagnosticsReport& r);
DiagnosticsReport schema_diagnostics(const store::StoreState& state, const std::string& graph_id);

struct TraceFilter {
  std::optional<std::string> entity;
  std::optional<std::string> predicate;
  std::optional<std::string> document_id;
  std::optional<int> page;
};
std::vector<store::TripleRecord> provenance_trace(const store::StoreState& state, const std::string& graph_id,
                                                  const TraceFilter& filter);
nlohmann::json trace_to_json(const std::vector<store::TripleRecord>& rows);

}  // namespace certkg::tasks
