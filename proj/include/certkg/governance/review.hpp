#pragma once

#include "certkg/governance/roles.hpp"
#include "certkg/store/graph_store.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace certkg::governance {

struct GovernanceConfig {
  double coverage_threshold = 1.0;
  std::size_t min_judgments = 1;  // human judgments needed for a triple to count as reviewed
};

struct JudgmentInput {
  std::string triple_id;
  store::ReviewAction action = store::ReviewAction::Keep;
  std::optional<store::TripleText> suggested_triple;
  std::string feedback;
  std::optional<store::Verdict> verdict;
  std::optional<double> confidence;
  bool apply = false;  // delete only: also soft-delete the triple
};

store::Judgment submit_judgment(store::GraphStore& store, const Actor& actor, const JudgmentInput& input);

struct Aggregate {
  std::string triple_id;
  std::map<std::string, std::size_t> human_actions;  // action -> count
  std::size_t human_judgments = 0;
  std::optional<store::Verdict> verifier_verdict;
  bool conflict = false;  // at least two distinct human actions
  std::optional<store::MetaVerdict> meta;
};

Aggregate aggregate_judgments(const store::StoreState& state, const std::string& triple_id);
Aggregate aggregate_judgments(const store::GraphStore& store, const std::string& triple_id);
nlohmann::json to_json(const Aggregate& a);

store::TripleRecord meta_finalize_triple(store::GraphStore& store, const Actor& actor,
                                         const std::string& triple_id, const std::string& decision,
                                         const std::string& note);

struct ReadinessReport {
  std::string document_id;
  store::DocumentState state = store::DocumentState::Draft;
  std::size_t total_triples = 0;     // non-deleted
  std::size_t reviewed_triples = 0;  // non-deleted with enough human judgments
  double coverage = 0.0;
  std::size_t unresolved_conflicts = 0;
  std::size_t finalized_triples = 0;
  bool certifiable = false;
  double coverage_threshold = 1.0;
  std::size_t total_inserted = 0;  // every triple ever attributed to the document
  std::size_t certified_triples = 0;
  std::size_t rejected_triples = 0;  // Rejected status or soft-deleted
  double retention = 0.0;            // certified / total_inserted
  std::vector<std::string> conflict_ids;
  std::vector<std::string> unreviewed_ids;
  // Verifier says INCORRECT while every human said keep.
  std::vector<std::string> high_risk_ids;
};

ReadinessReport readiness(const store::StoreState& state, const std::string& document_id,
                          const GovernanceConfig& config);
ReadinessReport readiness(const store::GraphStore& store, const std::string& document_id,
                          const GovernanceConfig& config);
nlohmann::json to_json(const ReadinessReport& r);

struct CertificationRecord {
  std::string document_id;
  std::string certified_at;
  std::string certified_by;
  std::size_t triple_count = 0;
};
nlohmann::json to_json(const CertificationRecord& c);

// Promotes non-deleted Draft triples whose human judgments agree on keep or
// edit, rejects unanimous deletes and soft-deleted Draft triples, then freezes
// the document. NotReady carries the readiness report as detail.
CertificationRecord certify_document(store::GraphStore& store, const Actor& actor,
                                     const std::string& document_id, const GovernanceConfig& config);

}  // namespace certkg::governance
