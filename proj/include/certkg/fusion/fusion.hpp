#pragma once

#include "certkg/governance/roles.hpp"
#include "certkg/store/graph_store.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace certkg::fusion {

// Simple case folding, then every code point that is not a letter, mark, or
// number becomes a space; whitespace runs collapse and the ends are trimmed.
// Idempotent for every input.
std::string normalize_entity(std::string_view name);

struct SharedEntity {
  std::string normalized;
  std::map<std::string, std::set<std::string>> variants_per_graph;  // graph -> original names
};

struct NamingConflict {
  std::string normalized;
  std::set<std::string> variants;
};

struct OverlapReport {
  std::vector<std::string> graph_ids;          // deduplicated, sorted
  std::vector<SharedEntity> shared_entities;   // sorted by normalized form
  std::vector<NamingConflict> naming_conflicts;
  std::map<std::string, std::size_t> per_graph_unique_counts;
};

// Entities are those with at least one non-deleted triple. The graph list is
// deduplicated and sorted, so the report is independent of argument order.
OverlapReport detect_overlaps(const store::StoreState& state, const std::vector<std::string>& graph_ids);
OverlapReport detect_overlaps(const store::GraphStore& store, const std::vector<std::string>& graph_ids);
nlohmann::json to_json(const OverlapReport& r);

struct FusedMember {
  std::string graph_id;
  std::string entity_id;
  std::string name;
};

struct FusedNode {
  std::string normalized;
  std::string label;  // first original spelling in graph order
  std::vector<FusedMember> members;
};

struct FusedEdge {
  std::string triple_id;
  std::string origin_graph;
  std::string subject;  // normalized class
  std::string predicate;
  std::string object;
  std::string subject_original;
  std::string object_original;
};

struct FusedSummary {
  std::size_t node_count = 0;
  std::size_t edge_count = 0;
  std::size_t merged_class_count = 0;  // classes backed by more than one original node
};

struct FusedGraph {
  std::vector<std::string> graph_ids;
  std::vector<FusedNode> nodes;  // classes touched by the returned edges
  std::vector<FusedEdge> edges;
  bool truncated = false;
  FusedSummary summary;  // over the full union, regardless of the cap
};

FusedGraph build_fused_preview(const store::StoreState& state, const std::vector<std::string>& graph_ids,
                               std::size_t edge_cap = store::kDefaultEdgeCap);
FusedGraph build_fused_preview(const store::GraphStore& store, const std::vector<std::string>& graph_ids,
                               std::size_t edge_cap = store::kDefaultEdgeCap);
nlohmann::json to_json(const FusedGraph& g);

enum class MergeKind { Rename, Merge };

struct MergeAction {
  MergeKind kind = MergeKind::Rename;
  std::string graph_id;
  std::vector<std::string> from;  // exactly one name for rename
  std::string to;
};

struct MergePlan {
  std::vector<MergeAction> actions;
  std::string author;
  std::string status = "proposed";  // proposed | applied
};

nlohmann::json to_json(const MergePlan& p);
// InvalidArgument on malformed plans.
MergePlan merge_plan_from_json(const nlohmann::json& j);

struct MergeResult {
  std::size_t renamed = 0;
  std::size_t merged = 0;  // merge actions plus renames coerced into merges
  std::size_t collapsed = 0;
  std::map<std::string, store::GraphStats> resulting_stats;
  MergePlan plan;  // status "applied"
};
nlohmann::json to_json(const MergeResult& r);

// All actions or none: every action is validated against the current state
// before the first event is written. PlanConflict when two actions share an
// entity name within a graph.
MergeResult apply_merge_plan(store::GraphStore& store, const governance::Actor& actor, const MergePlan& plan);

}  // namespace certkg::fusion
