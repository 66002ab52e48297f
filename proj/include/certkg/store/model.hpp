#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace certkg::store {

using json = nlohmann::json;

enum class TripleStatus { Draft, Certified, Rejected };
enum class Origin { LlmExtraction, ExpertAdded };
enum class DocumentState { Ingesting, Draft, UnderReview, Certified };
enum class Standard { Sasb, Gri, IfrsS2, Tcfd, Unknown };

std::string_view to_string(TripleStatus s);
std::string_view to_string(Origin o);
std::string_view to_string(DocumentState s);
std::string_view to_string(Standard s);
TripleStatus parse_triple_status(std::string_view s);
Origin parse_origin(std::string_view s);
DocumentState parse_document_state(std::string_view s);
// Returns nullopt for anything that is not one of the five identifiers.
std::optional<Standard> parse_standard(std::string_view s);

struct Provenance {
  std::string document_id;
  std::optional<int> page;
  std::optional<int> chunk_index;
  std::optional<std::string> evidence_sentence;

  bool operator==(const Provenance&) const = default;
};

struct EntityNode {
  std::string id;
  std::string graph_id;
  std::string name;
  std::string created_at;
  std::string created_by;
};

struct MetaVerdict {
  std::string decision;  // "certify" | "reject"
  std::string by;
  std::string note;
  std::string at;
};

struct TripleRecord {
  std::string id;
  std::string graph_id;
  std::string subject_id;
  std::string subject;
  std::string predicate;
  std::string object_id;
  std::string object;
  TripleStatus status = TripleStatus::Draft;
  bool deleted = false;
  Provenance provenance;
  Origin origin = Origin::LlmExtraction;
  std::string created_by;
  std::string created_at;
  std::string last_updated_by;
  std::string last_updated_at;
  std::optional<MetaVerdict> meta;
  std::size_t seq = 0;  // insertion order within the store
};

struct PageText {
  int page = 0;
  std::string text;
};

struct DocumentRecord {
  std::string id;
  std::string graph_id;
  std::string title;
  std::string source_file;
  Standard standard = Standard::Unknown;
  DocumentState state = DocumentState::Ingesting;
  std::vector<PageText> pages;
  std::string created_at;
  std::string created_by;
  std::optional<std::string> certified_at;
  std::optional<std::string> certified_by;
  json report;  // IngestReport once ingestion completes
};

enum class ReviewAction { Keep, Edit, Delete };
enum class Verdict { Correct, NeedsImprovement, Incorrect };

std::string_view to_string(ReviewAction a);
std::string_view to_string(Verdict v);
std::optional<ReviewAction> parse_review_action(std::string_view s);
std::optional<Verdict> parse_verdict(std::string_view s);

struct TripleText {
  std::string subject;
  std::string predicate;
  std::string object;

  bool operator==(const TripleText&) const = default;
};

inline constexpr std::string_view kVerifierReviewer = "llm-verifier";

struct Judgment {
  std::string id;
  std::string triple_id;
  std::string reviewer;
  ReviewAction action = ReviewAction::Keep;
  std::optional<TripleText> suggested_triple;
  std::string feedback;
  std::optional<Verdict> verdict;
  std::optional<double> confidence;
  std::string created_at;
  json assessment;  // full verifier payload for machine judgments

  bool is_machine() const { return reviewer == kVerifierReviewer; }
};

struct GraphStats {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::size_t deleted_count = 0;
  std::map<std::string, std::size_t> predicate_histogram;

  bool operator==(const GraphStats&) const = default;
};

struct Subgraph {
  std::vector<EntityNode> nodes;
  std::vector<TripleRecord> edges;
  bool truncated = false;
  GraphStats stats;
};

struct Path {
  std::vector<std::string> nodes;     // entity names, source first
  std::vector<std::string> edge_ids;  // triple ids, nodes.size() - 1 of them

  bool operator==(const Path&) const = default;
};

struct EdgeFilter {
  std::optional<std::set<std::string>> predicates;
  std::optional<std::set<std::string>> document_ids;
  std::optional<std::set<TripleStatus>> statuses;
  bool include_deleted = false;
};

struct EdgeRow {
  std::string triple_id;
  std::string subject;
  std::string predicate;
  std::string object;
  std::string document_id;
  std::optional<int> page;
  TripleStatus status = TripleStatus::Draft;
  bool deleted = false;

  bool operator==(const EdgeRow&) const = default;
};

inline constexpr std::size_t kDefaultEdgeCap = 500;

void to_json(json& j, const Provenance& p);
void from_json(const json& j, Provenance& p);
void to_json(json& j, const EntityNode& e);
void from_json(const json& j, EntityNode& e);
void to_json(json& j, const MetaVerdict& m);
void from_json(const json& j, MetaVerdict& m);
void to_json(json& j, const TripleRecord& t);
void from_json(const json& j, TripleRecord& t);
void to_json(json& j, const PageText& p);
void from_json(const json& j, PageText& p);
void to_json(json& j, const DocumentRecord& d);
void from_json(const json& j, DocumentRecord& d);
void to_json(json& j, const TripleText& t);
void from_json(const json& j, TripleText& t);
void to_json(json& j, const Judgment& jd);
void from_json(const json& j, Judgment& jd);
void to_json(json& j, const GraphStats& s);
void to_json(json& j, const Subgraph& g);
void to_json(json& j, const Path& p);
void to_json(json& j, const EdgeRow& r);

// Document metadata without page text, for catalogs and API listings.
json document_summary(const DocumentRecord& d);

}  // namespace certkg::store
