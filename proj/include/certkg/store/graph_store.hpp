#pragma once

#include "certkg/clock.hpp"
#include "certkg/store/event_log.hpp"
#include "certkg/store/model.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace certkg::store {

struct GraphState {
  std::string id;
  std::vector<EntityNode> entities;  // insertion order
  std::unordered_map<std::string, std::size_t> entity_by_name;
  std::unordered_map<std::string, std::size_t> entity_by_id;
  std::vector<TripleRecord> triples;  // insertion order
  std::unordered_map<std::string, std::size_t> triple_by_id;
  // entity id -> indices of incident triples (either endpoint), ascending
  std::unordered_map<std::string, std::vector<std::size_t>> incident;

  const EntityNode* find_entity(std::string_view name) const;
  const EntityNode& entity_by_name_or_throw(std::string_view name) const;
  const EntityNode& entity(const std::string& id) const;
  const TripleRecord* find_triple(const std::string& id) const;
  // Entities incident to at least one non-deleted triple, insertion order.
  std::vector<const EntityNode*> active_entities() const;
  bool is_active(const std::string& entity_id) const;

  void rebuild_indexes();
};

struct IdCounters {
  std::uint64_t entity = 0;
  std::uint64_t triple = 0;
  std::uint64_t judgment = 0;
  std::uint64_t document = 0;
};

struct StoreState {
  std::map<std::string, GraphState> graphs;
  std::vector<std::string> graph_order;
  std::map<std::string, DocumentRecord> documents;
  std::vector<std::string> document_order;
  std::unordered_map<std::string, std::string> triple_graph;  // triple id -> graph id
  std::vector<Judgment> judgments;                            // submission order
  IdCounters next_ids;

  const GraphState& graph(const std::string& id) const;
  const DocumentRecord& document(const std::string& id) const;
  const TripleRecord& triple(const std::string& id) const;
  const GraphState& graph_of_triple(const std::string& triple_id) const;
  std::vector<const TripleRecord*> document_triples(const std::string& document_id) const;
  std::vector<const Judgment*> judgments_for(const std::string& triple_id) const;
};

struct TriplePatch {
  std::optional<std::string> subject;
  std::optional<std::string> predicate;
  std::optional<std::string> object;

  bool empty() const { return !subject && !predicate && !object; }
};

struct InsertResult {
  TripleRecord record;
  bool inserted = false;  // false when collapsed onto an identical existing triple
};

struct RenameResult {
  std::string entity_id;
  bool coerced_to_merge = false;
  std::size_t collapsed = 0;
};

struct MergeOutcome {
  std::string into_entity_id;
  std::size_t redirected = 0;
  std::size_t collapsed = 0;
  std::vector<std::string> removed_entities;
};

// Embedded provenance-aware property graph, event-sourced. Writes are
// serialized through one writer; reads share a lock and see a consistent state.
class GraphStore {
 public:
  struct Options {
    std::filesystem::path log_path;       // empty: in-memory
    std::filesystem::path snapshot_path;  // optional
    Clock clock = system_clock();
  };

  explicit GraphStore(Options options);
  GraphStore() : GraphStore(Options{}) {}

  class Writer;

  template <typename F>
  decltype(auto) write(F&& fn);

  template <typename F>
  decltype(auto) read(F&& fn) const {
    auto lock = reader_lock();
    return fn(static_cast<const StoreState&>(state_));
  }

  // Convenience wrappers; each is one write transaction.
  void create_graph(const std::string& graph_id, const std::string& actor);
  DocumentRecord register_document(const std::string& graph_id, const std::string& title,
                                   std::vector<PageText> pages, const std::string& actor,
                                   const std::string& source_file = {});
  EntityNode upsert_entity(const std::string& graph_id, const std::string& name,
                           const std::string& actor);
  InsertResult insert_triple(const std::string& graph_id, const std::string& subject,
                             const std::string& predicate, const std::string& object,
                             const Provenance& provenance, const std::string& actor,
                             Origin origin = Origin::LlmExtraction);
  TripleRecord update_triple(const std::string& graph_id, const std::string& triple_id,
                             const TriplePatch& patch, const std::string& actor);
  TripleRecord soft_delete_triple(const std::string& graph_id, const std::string& triple_id,
                                  const std::string& actor);
  TripleRecord restore_triple(const std::string& graph_id, const std::string& triple_id,
                              const std::string& actor);

  Subgraph query_neighborhood(const std::string& graph_id, const std::string& entity_name,
                              int hops, const EdgeFilter& filter,
                              std::size_t edge_cap = kDefaultEdgeCap) const;
  std::vector<Path> find_paths(const std::string& graph_id, const std::string& source,
                               const std::string& target, int max_hops,
                               std::size_t max_paths) const;
  GraphStats graph_stats(const std::string& graph_id) const;
  std::vector<EdgeRow> export_edges(const std::string& graph_id, const EdgeFilter& filter) const;

  TripleRecord get_triple(const std::string& triple_id) const;
  DocumentRecord get_document(const std::string& document_id) const;
  bool has_graph(const std::string& graph_id) const;

  std::vector<AuditEntry> audit_entries(std::uint64_t from_seq = 0,
                                        const std::string& document_id = {}) const;
  std::size_t event_count() const;
  ChainVerification verify_audit() const;
  std::vector<std::string> log_lines() const;
  const std::filesystem::path& log_path() const { return log_.path(); }

  void write_snapshot(const std::filesystem::path& path) const;
  std::string now() const { return log_.now(); }

  // Replays raw events into a fresh state; shared by startup and tests.
  static void apply_event(StoreState& state, const Event& e);

 private:
  void load_snapshot(const std::filesystem::path& path, std::uint64_t* last_seq);

  // Readers pass through `gate_` before taking the shared lock; a waiting
  // writer holds the gate, so a steady stream of readers cannot starve it.
  std::shared_lock<std::shared_mutex> reader_lock() const {
    std::lock_guard gate(gate_);
    return std::shared_lock(mutex_);
  }
  std::unique_lock<std::shared_mutex> writer_lock() {
    std::lock_guard gate(gate_);
    return std::unique_lock(mutex_);
  }

  mutable std::mutex gate_;
  mutable std::shared_mutex mutex_;
  StoreState state_;
  EventLog log_;
};

// Mutation surface available inside GraphStore::write. Every method validates
// against current state before committing exactly one event (or none, for
// no-ops), so a transaction that throws during validation leaves no trace.
class GraphStore::Writer {
 public:
  const StoreState& state() const { return store_.state_; }
  std::string now() const { return store_.log_.now(); }

  void create_graph(const std::string& graph_id, const std::string& actor);
  DocumentRecord register_document(const std::string& graph_id, const std::string& title,
                                   std::vector<PageText> pages, const std::string& actor,
                                   const std::string& source_file);
  void set_document_state(const std::string& document_id, DocumentState state,
                          const std::string& actor);
  void set_document_standard(const std::string& document_id, Standard standard,
                             const std::string& actor);
  void set_document_report(const std::string& document_id, const json& report,
                           const std::string& actor);
  EntityNode upsert_entity(const std::string& graph_id, const std::string& name,
                           const std::string& actor);
  InsertResult insert_triple(const std::string& graph_id, const std::string& subject,
                             const std::string& predicate, const std::string& object,
                             const Provenance& provenance, const std::string& actor,
                             Origin origin);
  TripleRecord update_triple(const std::string& graph_id, const std::string& triple_id,
                             const TriplePatch& patch, const std::string& actor);
  TripleRecord soft_delete_triple(const std::string& graph_id, const std::string& triple_id,
                                  const std::string& actor, const std::string& reason = {});
  TripleRecord restore_triple(const std::string& graph_id, const std::string& triple_id,
                              const std::string& actor);
  TripleRecord finalize_triple(const std::string& triple_id, const std::string& decision,
                               const std::string& note, const std::string& actor);
  Judgment record_judgment(Judgment judgment, const std::string& actor);
  void certify_document(const std::string& document_id, const std::vector<std::string>& promote,
                        const std::vector<std::string>& reject, const std::string& actor);
  RenameResult rename_entity(const std::string& graph_id, const std::string& from,
                             const std::string& to, const std::string& actor);
  MergeOutcome merge_entities(const std::string& graph_id, const std::vector<std::string>& from,
                              const std::string& to, const std::string& actor);
  // Governance/account events that do not change graph state but belong in the
  // audit chain.
  void audit_only(const std::string& type, const std::string& ref, json payload,
                  const std::string& actor);

 private:
  friend class GraphStore;
  explicit Writer(GraphStore& store) : store_(store) {}
  const Event& commit(const std::string& type, const std::string& actor, const std::string& ref,
                      json payload, bool sync = false);
  void ensure_document_mutable(const std::string& document_id) const;
  GraphStore& store_;
};

template <typename F>
decltype(auto) GraphStore::write(F&& fn) {
  auto lock = writer_lock();
  Writer writer(*this);
  return fn(writer);
}

}  // namespace certkg::store
