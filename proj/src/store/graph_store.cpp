#include "certkg/store/graph_store.hpp"

#include "certkg/error.hpp"
#include "certkg/store/traversal.hpp"
#include "certkg/text.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>

namespace certkg::store {
namespace {

void bump(std::uint64_t& counter, const std::string& id, char prefix) {
  if (id.size() < 2 || id[0] != prefix) return;
  std::uint64_t n = 0;
  auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), n);
  if (ec == std::errc() && ptr == id.data() + id.size()) counter = std::max(counter, n);
}

std::string make_id(std::uint64_t counter, char prefix) {
  return std::string(1, prefix) + std::to_string(counter + 1);
}

void add_incident(GraphState& g, std::size_t idx) {
  const TripleRecord& t = g.triples[idx];
  auto insert_sorted = [&](const std::string& entity) {
    auto& list = g.incident[entity];
    list.insert(std::lower_bound(list.begin(), list.end(), idx), idx);
  };
  insert_sorted(t.subject_id);
  if (t.object_id != t.subject_id) insert_sorted(t.object_id);
}

void remove_incident(GraphState& g, std::size_t idx) {
  const TripleRecord& t = g.triples[idx];
  for (const std::string* entity : {&t.subject_id, &t.object_id}) {
    auto it = g.incident.find(*entity);
    if (it == g.incident.end()) continue;
    auto& list = it->second;
    list.erase(std::remove(list.begin(), list.end(), idx), list.end());
  }
}

GraphState& mutable_graph(StoreState& s, const std::string& id) {
  auto it = s.graphs.find(id);
  if (it == s.graphs.end()) throw Error(ErrorCode::UnknownGraph, "unknown graph: " + id);
  return it->second;
}

DocumentRecord& mutable_document(StoreState& s, const std::string& id) {
  auto it = s.documents.find(id);
  if (it == s.documents.end()) throw Error(ErrorCode::UnknownDocument, "unknown document: " + id);
  return it->second;
}

TripleRecord& mutable_triple(StoreState& s, const std::string& id) {
  auto git = s.triple_graph.find(id);
  if (git == s.triple_graph.end()) throw Error(ErrorCode::NotFound, "unknown triple: " + id);
  GraphState& g = mutable_graph(s, git->second);
  return g.triples[g.triple_by_id.at(id)];
}

void add_entity(StoreState& s, GraphState& g, const std::string& id, const std::string& name,
                const Event& e) {
  g.entity_by_name[name] = g.entities.size();
  g.entity_by_id[id] = g.entities.size();
  g.entities.push_back(EntityNode{id, g.id, name, e.ts, e.actor});
  bump(s.next_ids.entity, id, 'e');
}

void touch(TripleRecord& t, const Event& e) {
  t.last_updated_by = e.actor;
  t.last_updated_at = e.ts;
}

std::string required(const std::string& value, ErrorCode code, const char* what) {
  std::string trimmed = text::trim(value);
  if (trimmed.empty()) throw Error(code, std::string(what) + " must be non-empty");
  return trimmed;
}

}  // namespace

// ---------------------------------------------------------------- GraphState

const EntityNode* GraphState::find_entity(std::string_view name) const {
  auto it = entity_by_name.find(std::string(name));
  return it == entity_by_name.end() ? nullptr : &entities[it->second];
}

const EntityNode& GraphState::entity_by_name_or_throw(std::string_view name) const {
  const EntityNode* e = find_entity(name);
  if (e == nullptr) {
    throw Error(ErrorCode::UnknownEntity, "unknown entity '" + std::string(name) + "' in " + id);
  }
  return *e;
}

const EntityNode& GraphState::entity(const std::string& entity_id) const {
  return entities.at(entity_by_id.at(entity_id));
}

const TripleRecord* GraphState::find_triple(const std::string& triple_id) const {
  auto it = triple_by_id.find(triple_id);
  return it == triple_by_id.end() ? nullptr : &triples[it->second];
}

bool GraphState::is_active(const std::string& entity_id) const {
  auto it = incident.find(entity_id);
  if (it == incident.end()) return false;
  return std::any_of(it->second.begin(), it->second.end(),
                     [&](std::size_t idx) { return !triples[idx].deleted; });
}

std::vector<const EntityNode*> GraphState::active_entities() const {
  std::vector<const EntityNode*> out;
  for (const auto& e : entities) {
    if (is_active(e.id)) out.push_back(&e);
  }
  return out;
}

void GraphState::rebuild_indexes() {
  entity_by_name.clear();
  entity_by_id.clear();
  triple_by_id.clear();
  incident.clear();
  for (std::size_t i = 0; i < entities.size(); ++i) {
    entity_by_name[entities[i].name] = i;
    entity_by_id[entities[i].id] = i;
  }
  for (std::size_t i = 0; i < triples.size(); ++i) {
    triple_by_id[triples[i].id] = i;
    add_incident(*this, i);
  }
}

// ---------------------------------------------------------------- StoreState

const GraphState& StoreState::graph(const std::string& id) const {
  auto it = graphs.find(id);
  if (it == graphs.end()) throw Error(ErrorCode::UnknownGraph, "unknown graph: " + id);
  return it->second;
}

const DocumentRecord& StoreState::document(const std::string& id) const {
  auto it = documents.find(id);
  if (it == documents.end()) throw Error(ErrorCode::UnknownDocument, "unknown document: " + id);
  return it->second;
}

const GraphState& StoreState::graph_of_triple(const std::string& triple_id) const {
  auto it = triple_graph.find(triple_id);
  if (it == triple_graph.end()) throw Error(ErrorCode::NotFound, "unknown triple: " + triple_id);
  return graph(it->second);
}

const TripleRecord& StoreState::triple(const std::string& id) const {
  return *graph_of_triple(id).find_triple(id);
}

std::vector<const TripleRecord*> StoreState::document_triples(const std::string& document_id) const {
  const DocumentRecord& d = document(document_id);
  std::vector<const TripleRecord*> out;
  for (const auto& t : graph(d.graph_id).triples) {
    if (t.provenance.document_id == document_id) out.push_back(&t);
  }
  return out;
}

std::vector<const Judgment*> StoreState::judgments_for(const std::string& triple_id) const {
  std::vector<const Judgment*> out;
  for (const auto& j : judgments) {
    if (j.triple_id == triple_id) out.push_back(&j);
  }
  return out;
}

// ---------------------------------------------------------------- replay

void GraphStore::apply_event(StoreState& s, const Event& e) {
  const json& p = e.payload;
  const std::string& type = e.type;

  if (type == "graph.create") {
    const auto id = p.at("graph_id").get<std::string>();
    GraphState g;
    g.id = id;
    s.graphs.emplace(id, std::move(g));
    s.graph_order.push_back(id);
  } else if (type == "document.register") {
    DocumentRecord d = p.at("document").get<DocumentRecord>();
    d.created_at = e.ts;
    d.created_by = e.actor;
    bump(s.next_ids.document, d.id, 'd');
    s.document_order.push_back(d.id);
    s.documents.emplace(d.id, std::move(d));
  } else if (type == "document.state") {
    mutable_document(s, p.at("document_id").get<std::string>()).state =
        parse_document_state(p.at("state").get<std::string>());
  } else if (type == "document.standard") {
    mutable_document(s, p.at("document_id").get<std::string>()).standard =
        parse_standard(p.at("standard").get<std::string>()).value_or(Standard::Unknown);
  } else if (type == "document.report") {
    mutable_document(s, p.at("document_id").get<std::string>()).report = p.at("report");
  } else if (type == "document.certify") {
    for (const auto& id : p.at("promote")) {
      TripleRecord& t = mutable_triple(s, id.get<std::string>());
      t.status = TripleStatus::Certified;
      touch(t, e);
    }
    for (const auto& id : p.at("reject")) {
      TripleRecord& t = mutable_triple(s, id.get<std::string>());
      t.status = TripleStatus::Rejected;
      t.deleted = true;
      touch(t, e);
    }
    DocumentRecord& d = mutable_document(s, p.at("document_id").get<std::string>());
    d.state = DocumentState::Certified;
    d.certified_at = e.ts;
    d.certified_by = e.actor;
  } else if (type == "entity.create") {
    GraphState& g = mutable_graph(s, p.at("graph_id").get<std::string>());
    add_entity(s, g, p.at("entity_id").get<std::string>(), p.at("name").get<std::string>(), e);
  } else if (type == "triple.insert") {
    const json& tj = p.at("triple");
    GraphState& g = mutable_graph(s, tj.at("graph_id").get<std::string>());
    for (const auto& ne : p.at("new_entities")) {
      add_entity(s, g, ne.at("id").get<std::string>(), ne.at("name").get<std::string>(), e);
    }
    TripleRecord t;
    t.id = tj.at("id").get<std::string>();
    t.graph_id = g.id;
    t.subject_id = tj.at("subject_id").get<std::string>();
    t.subject = g.entity(t.subject_id).name;
    t.predicate = tj.at("predicate").get<std::string>();
    t.object_id = tj.at("object_id").get<std::string>();
    t.object = g.entity(t.object_id).name;
    t.provenance = tj.at("provenance").get<Provenance>();
    t.origin = parse_origin(tj.at("origin").get<std::string>());
    t.created_by = t.last_updated_by = e.actor;
    t.created_at = t.last_updated_at = e.ts;
    bump(s.next_ids.triple, t.id, 't');
    t.seq = s.next_ids.triple;
    s.triple_graph[t.id] = g.id;
    g.triple_by_id[t.id] = g.triples.size();
    g.triples.push_back(std::move(t));
    add_incident(g, g.triples.size() - 1);
  } else if (type == "triple.update") {
    const auto id = p.at("triple_id").get<std::string>();
    GraphState& g = mutable_graph(s, s.triple_graph.at(id));
    for (const auto& ne : p.at("new_entities")) {
      add_entity(s, g, ne.at("id").get<std::string>(), ne.at("name").get<std::string>(), e);
    }
    const std::size_t idx = g.triple_by_id.at(id);
    remove_incident(g, idx);
    TripleRecord& t = g.triples[idx];
    const json& after = p.at("after");
    t.subject_id = after.at("subject_id").get<std::string>();
    t.subject = g.entity(t.subject_id).name;
    t.predicate = after.at("predicate").get<std::string>();
    t.object_id = after.at("object_id").get<std::string>();
    t.object = g.entity(t.object_id).name;
    touch(t, e);
    add_incident(g, idx);
  } else if (type == "triple.delete") {
    TripleRecord& t = mutable_triple(s, p.at("triple_id").get<std::string>());
    t.deleted = true;
    touch(t, e);
  } else if (type == "triple.restore") {
    TripleRecord& t = mutable_triple(s, p.at("triple_id").get<std::string>());
    t.deleted = false;
    touch(t, e);
  } else if (type == "triple.finalize") {
    TripleRecord& t = mutable_triple(s, p.at("triple_id").get<std::string>());
    const auto decision = p.at("decision").get<std::string>();
    t.meta = MetaVerdict{decision, e.actor, p.at("note").get<std::string>(), e.ts};
    if (decision == "certify") {
      t.status = TripleStatus::Certified;
    } else {
      t.status = TripleStatus::Rejected;
      t.deleted = true;
    }
    touch(t, e);
  } else if (type == "judgment.submit") {
    Judgment j = p.at("judgment").get<Judgment>();
    j.created_at = e.ts;
    if (p.contains("replaces") && !p.at("replaces").is_null()) {
      const auto old = p.at("replaces").get<std::string>();
      std::erase_if(s.judgments, [&](const Judgment& x) { return x.id == old; });
    }
    bump(s.next_ids.judgment, j.id, 'j');
    s.judgments.push_back(std::move(j));
  } else if (type == "entity.rename") {
    GraphState& g = mutable_graph(s, p.at("graph_id").get<std::string>());
    const auto entity_id = p.at("entity_id").get<std::string>();
    const auto to = p.at("to").get<std::string>();
    EntityNode& node = g.entities[g.entity_by_id.at(entity_id)];
    g.entity_by_name.erase(node.name);
    node.name = to;
    g.entity_by_name[to] = g.entity_by_id.at(entity_id);
    for (auto& t : g.triples) {
      bool changed = false;
      if (t.subject_id == entity_id) t.subject = to, changed = true;
      if (t.object_id == entity_id) t.object = to, changed = true;
      if (changed) touch(t, e);
    }
  } else if (type == "entity.merge") {
    GraphState& g = mutable_graph(s, p.at("graph_id").get<std::string>());
    const json& into = p.at("into");
    const auto into_id = into.at("id").get<std::string>();
    if (into.at("created").get<bool>()) add_entity(s, g, into_id, into.at("name").get<std::string>(), e);
    const std::string into_name = g.entity(into_id).name;
    std::set<std::string> from;
    for (const auto& f : p.at("from_ids")) from.insert(f.get<std::string>());
    for (auto& t : g.triples) {
      bool changed = false;
      if (from.contains(t.subject_id)) t.subject_id = into_id, t.subject = into_name, changed = true;
      if (from.contains(t.object_id)) t.object_id = into_id, t.object = into_name, changed = true;
      if (changed) touch(t, e);
    }
    for (const auto& c : p.at("collapsed")) {
      TripleRecord& t = g.triples[g.triple_by_id.at(c.get<std::string>())];
      t.deleted = true;
      touch(t, e);
    }
    std::set<std::string> removed;
    for (const auto& r : p.at("removed")) removed.insert(r.get<std::string>());
    std::erase_if(g.entities, [&](const EntityNode& n) { return removed.contains(n.id); });
    g.rebuild_indexes();
  }
  // Remaining types (log.header, account.*, audit-only events) carry no graph state.
}

// ---------------------------------------------------------------- GraphStore

GraphStore::GraphStore(Options options) : log_(options.log_path, options.clock) {
  std::uint64_t last_seq = 0;
  bool from_snapshot = false;
  if (!options.snapshot_path.empty() && std::filesystem::exists(options.snapshot_path)) {
    load_snapshot(options.snapshot_path, &last_seq);
    from_snapshot = true;
  }
  for (const auto& e : log_.events()) {
    if (from_snapshot && e.seq <= last_seq) continue;
    apply_event(state_, e);
  }
}

void GraphStore::load_snapshot(const std::filesystem::path& path, std::uint64_t* last_seq) {
  std::ifstream in(path);
  const json snap = json::parse(in);
  *last_seq = snap.at("last_seq").get<std::uint64_t>();
  const auto& events = log_.events();
  // A snapshot that does not match the log it claims to summarize is ignored.
  if (*last_seq >= events.size() || events[*last_seq].digest != snap.at("last_digest")) {
    *last_seq = 0;
    state_ = StoreState{};
    for (const auto& e : events) apply_event(state_, e);
    *last_seq = events.empty() ? 0 : events.back().seq;
    return;
  }
  StoreState s;
  for (const auto& gid : snap.at("graphs")) {
    GraphState g;
    g.id = gid.get<std::string>();
    s.graph_order.push_back(g.id);
    s.graphs.emplace(g.id, std::move(g));
  }
  for (const auto& ej : snap.at("entities")) {
    EntityNode n = ej.get<EntityNode>();
    s.graphs.at(n.graph_id).entities.push_back(std::move(n));
  }
  for (const auto& tj : snap.at("triples")) {
    TripleRecord t = tj.get<TripleRecord>();
    s.triple_graph[t.id] = t.graph_id;
    s.graphs.at(t.graph_id).triples.push_back(std::move(t));
  }
  for (auto& [id, g] : s.graphs) g.rebuild_indexes();
  for (const auto& dj : snap.at("documents")) {
    DocumentRecord d = dj.get<DocumentRecord>();
    s.document_order.push_back(d.id);
    s.documents.emplace(d.id, std::move(d));
  }
  for (const auto& jj : snap.at("judgments")) s.judgments.push_back(jj.get<Judgment>());
  const json& ids = snap.at("next_ids");
  s.next_ids = IdCounters{ids.at("entity"), ids.at("triple"), ids.at("judgment"), ids.at("document")};
  state_ = std::move(s);
}

void GraphStore::write_snapshot(const std::filesystem::path& path) const {
  auto lock = reader_lock();
  json snap;
  snap["format"] = "certkg-snapshot";
  snap["v"] = kEventSchemaVersion;
  const auto& events = log_.events();
  snap["last_seq"] = events.empty() ? 0 : events.back().seq;
  snap["last_digest"] = events.empty() ? genesis_digest() : events.back().digest;
  snap["graphs"] = state_.graph_order;
  json entities = json::array();
  json triples = json::array();
  for (const auto& gid : state_.graph_order) {
    const GraphState& g = state_.graphs.at(gid);
    for (const auto& e : g.entities) entities.push_back(e);
    for (const auto& t : g.triples) triples.push_back(t);
  }
  snap["entities"] = std::move(entities);
  snap["triples"] = std::move(triples);
  json docs = json::array();
  for (const auto& id : state_.document_order) docs.push_back(state_.documents.at(id));
  snap["documents"] = std::move(docs);
  snap["judgments"] = state_.judgments;
  snap["next_ids"] = json{{"entity", state_.next_ids.entity},
                          {"triple", state_.next_ids.triple},
                          {"judgment", state_.next_ids.judgment},
                          {"document", state_.next_ids.document}};
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << canonical_dump(snap) << '\n';
    if (!out) throw Error(ErrorCode::Io, "snapshot write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void GraphStore::create_graph(const std::string& graph_id, const std::string& actor) {
  write([&](Writer& w) { w.create_graph(graph_id, actor); });
}

DocumentRecord GraphStore::register_document(const std::string& graph_id, const std::string& title,
                                             std::vector<PageText> pages, const std::string& actor,
                                             const std::string& source_file) {
  return write([&](Writer& w) {
    return w.register_document(graph_id, title, std::move(pages), actor, source_file);
  });
}

EntityNode GraphStore::upsert_entity(const std::string& graph_id, const std::string& name,
                                     const std::string& actor) {
  return write([&](Writer& w) { return w.upsert_entity(graph_id, name, actor); });
}

InsertResult GraphStore::insert_triple(const std::string& graph_id, const std::string& subject,
                                       const std::string& predicate, const std::string& object,
                                       const Provenance& provenance, const std::string& actor,
                                       Origin origin) {
  return write([&](Writer& w) {
    return w.insert_triple(graph_id, subject, predicate, object, provenance, actor, origin);
  });
}

TripleRecord GraphStore::update_triple(const std::string& graph_id, const std::string& triple_id,
                                       const TriplePatch& patch, const std::string& actor) {
  return write([&](Writer& w) { return w.update_triple(graph_id, triple_id, patch, actor); });
}

TripleRecord GraphStore::soft_delete_triple(const std::string& graph_id,
                                            const std::string& triple_id,
                                            const std::string& actor) {
  return write([&](Writer& w) { return w.soft_delete_triple(graph_id, triple_id, actor); });
}

TripleRecord GraphStore::restore_triple(const std::string& graph_id, const std::string& triple_id,
                                        const std::string& actor) {
  return write([&](Writer& w) { return w.restore_triple(graph_id, triple_id, actor); });
}

Subgraph GraphStore::query_neighborhood(const std::string& graph_id,
                                        const std::string& entity_name, int hops,
                                        const EdgeFilter& filter, std::size_t edge_cap) const {
  return read([&](const StoreState& s) {
    return neighborhood(s.graph(graph_id), entity_name, hops, filter, edge_cap);
  });
}

std::vector<Path> GraphStore::find_paths(const std::string& graph_id, const std::string& source,
                                         const std::string& target, int max_hops,
                                         std::size_t max_paths) const {
  return read([&](const StoreState& s) {
    return simple_paths(s.graph(graph_id), source, target, max_hops, max_paths);
  });
}

GraphStats GraphStore::graph_stats(const std::string& graph_id) const {
  return read([&](const StoreState& s) { return compute_stats(s.graph(graph_id)); });
}

std::vector<EdgeRow> GraphStore::export_edges(const std::string& graph_id,
                                              const EdgeFilter& filter) const {
  return read([&](const StoreState& s) { return edge_rows(s.graph(graph_id), filter); });
}

TripleRecord GraphStore::get_triple(const std::string& triple_id) const {
  return read([&](const StoreState& s) { return s.triple(triple_id); });
}

DocumentRecord GraphStore::get_document(const std::string& document_id) const {
  return read([&](const StoreState& s) { return s.document(document_id); });
}

bool GraphStore::has_graph(const std::string& graph_id) const {
  return read([&](const StoreState& s) { return s.graphs.contains(graph_id); });
}

std::vector<AuditEntry> GraphStore::audit_entries(std::uint64_t from_seq,
                                                  const std::string& document_id) const {
  auto lock = reader_lock();
  auto triple_doc = [&](const std::string& triple_id) -> std::string {
    auto it = state_.triple_graph.find(triple_id);
    if (it == state_.triple_graph.end()) return {};
    const TripleRecord* t = state_.graphs.at(it->second).find_triple(triple_id);
    return t ? t->provenance.document_id : std::string{};
  };
  auto concerns = [&](const Event& e) {
    if (document_id.empty()) return true;
    if (e.ref == document_id) return true;
    const json& p = e.payload;
    if (p.is_object()) {
      if (p.value("document_id", "") == document_id) return true;
      if (p.contains("triple") && p["triple"].contains("provenance") &&
          p["triple"]["provenance"].value("document_id", "") == document_id) {
        return true;
      }
      if (p.contains("judgment") && triple_doc(p["judgment"].value("triple_id", "")) == document_id) {
        return true;
      }
    }
    return triple_doc(e.ref) == document_id;
  };
  std::vector<AuditEntry> out;
  for (const auto& e : log_.events()) {
    if (e.seq < from_seq || !concerns(e)) continue;
    out.push_back(to_audit_entry(e));
  }
  return out;
}

std::size_t GraphStore::event_count() const {
  auto lock = reader_lock();
  return log_.events().size();
}

ChainVerification GraphStore::verify_audit() const {
  auto lock = reader_lock();
  return EventLog::verify_lines(log_.lines());
}

std::vector<std::string> GraphStore::log_lines() const {
  auto lock = reader_lock();
  return log_.lines();
}

// ---------------------------------------------------------------- Writer

const Event& GraphStore::Writer::commit(const std::string& type, const std::string& actor,
                                        const std::string& ref, json payload, bool sync) {
  const Event& e = store_.log_.append(type, actor, ref, std::move(payload), sync);
  apply_event(store_.state_, e);
  return e;
}

void GraphStore::Writer::ensure_document_mutable(const std::string& document_id) const {
  const DocumentRecord& d = state().document(document_id);
  if (d.state == DocumentState::Certified) {
    throw Error(ErrorCode::CertifiedImmutable, "document " + document_id + " is certified");
  }
}

void GraphStore::Writer::create_graph(const std::string& graph_id, const std::string& actor) {
  const std::string id = required(graph_id, ErrorCode::InvalidArgument, "graph id");
  if (state().graphs.contains(id)) throw Error(ErrorCode::DuplicateGraph, "graph exists: " + id);
  commit("graph.create", actor, id, json{{"graph_id", id}});
}

DocumentRecord GraphStore::Writer::register_document(const std::string& graph_id,
                                                     const std::string& title,
                                                     std::vector<PageText> pages,
                                                     const std::string& actor,
                                                     const std::string& source_file) {
  int last_page = 0;
  for (const auto& p : pages) {
    if (p.page <= last_page) {
      throw Error(ErrorCode::InvalidArgument, "page numbers must be positive and strictly increasing");
    }
    last_page = p.page;
  }
  DocumentRecord d;
  d.id = make_id(state().next_ids.document, 'd');
  d.graph_id = graph_id.empty() ? d.id : graph_id;
  if (graph_id.empty()) {
    if (!state().graphs.contains(d.graph_id)) create_graph(d.graph_id, actor);
  } else {
    state().graph(graph_id);
  }
  d.title = title;
  d.source_file = source_file;
  d.pages = std::move(pages);
  d.state = DocumentState::Ingesting;
  commit("document.register", actor, d.id, json{{"document", d}});
  return state().document(d.id);
}

void GraphStore::Writer::set_document_state(const std::string& document_id, DocumentState state_to,
                                            const std::string& actor) {
  const DocumentRecord& d = state().document(document_id);
  if (d.state == state_to) return;
  if (d.state == DocumentState::Certified) {
    throw Error(ErrorCode::DocumentCertified, "document " + document_id + " is certified");
  }
  commit("document.state", actor, document_id,
         json{{"document_id", document_id}, {"state", to_string(state_to)}});
}

void GraphStore::Writer::set_document_standard(const std::string& document_id, Standard standard,
                                               const std::string& actor) {
  state().document(document_id);
  commit("document.standard", actor, document_id,
         json{{"document_id", document_id}, {"standard", to_string(standard)}});
}

void GraphStore::Writer::set_document_report(const std::string& document_id, const json& report,
                                             const std::string& actor) {
  state().document(document_id);
  commit("document.report", actor, document_id,
         json{{"document_id", document_id}, {"report", report}});
}

EntityNode GraphStore::Writer::upsert_entity(const std::string& graph_id, const std::string& name,
                                             const std::string& actor) {
  const std::string trimmed = required(name, ErrorCode::EmptyName, "entity name");
  const GraphState& g = state().graph(graph_id);
  if (const EntityNode* existing = g.find_entity(trimmed)) return *existing;
  const std::string id = make_id(state().next_ids.entity, 'e');
  commit("entity.create", actor, id, json{{"graph_id", graph_id}, {"entity_id", id}, {"name", trimmed}});
  return state().graph(graph_id).entity(id);
}

InsertResult GraphStore::Writer::insert_triple(const std::string& graph_id,
                                               const std::string& subject,
                                               const std::string& predicate,
                                               const std::string& object,
                                               const Provenance& provenance,
                                               const std::string& actor, Origin origin) {
  const GraphState& g = state().graph(graph_id);
  const std::string s = required(subject, ErrorCode::EmptyField, "subject");
  const std::string p = required(predicate, ErrorCode::EmptyField, "predicate");
  const std::string o = required(object, ErrorCode::EmptyField, "object");
  const DocumentRecord& doc = state().document(provenance.document_id);
  if (doc.graph_id != graph_id) {
    throw Error(ErrorCode::UnknownDocument,
                "document " + doc.id + " does not belong to graph " + graph_id);
  }
  ensure_document_mutable(doc.id);

  const EntityNode* se = g.find_entity(s);
  const EntityNode* oe = g.find_entity(o);
  if (se != nullptr && oe != nullptr) {
    if (auto it = g.incident.find(se->id); it != g.incident.end()) {
      for (std::size_t idx : it->second) {
        const TripleRecord& t = g.triples[idx];
        if (!t.deleted && t.subject_id == se->id && t.object_id == oe->id && t.predicate == p &&
            t.provenance.document_id == doc.id) {
          return InsertResult{t, false};
        }
      }
    }
  }

  std::uint64_t entity_counter = state().next_ids.entity;
  json new_entities = json::array();
  auto resolve = [&](const EntityNode* existing, const std::string& name) -> std::string {
    if (existing != nullptr) return existing->id;
    for (const auto& ne : new_entities) {
      if (ne["name"] == name) return ne["id"].get<std::string>();
    }
    std::string id = make_id(entity_counter++, 'e');
    new_entities.push_back(json{{"id", id}, {"name", name}});
    return id;
  };
  const std::string sid = resolve(se, s);
  const std::string oid = resolve(oe, o);
  const std::string tid = make_id(state().next_ids.triple, 't');
  json triple{{"id", tid},
              {"graph_id", graph_id},
              {"subject_id", sid},
              {"predicate", p},
              {"object_id", oid},
              {"provenance", provenance},
              {"origin", to_string(origin)}};
  commit("triple.insert", actor, tid,
         json{{"triple", std::move(triple)}, {"new_entities", std::move(new_entities)}});
  return InsertResult{state().triple(tid), true};
}

TripleRecord GraphStore::Writer::update_triple(const std::string& graph_id,
                                               const std::string& triple_id,
                                               const TriplePatch& patch,
                                               const std::string& actor) {
  const GraphState& g = state().graph(graph_id);
  const TripleRecord* t = g.find_triple(triple_id);
  if (t == nullptr) throw Error(ErrorCode::NotFound, "unknown triple: " + triple_id);
  if (t->status == TripleStatus::Certified) {
    throw Error(ErrorCode::CertifiedImmutable, "triple " + triple_id + " is certified");
  }
  ensure_document_mutable(t->provenance.document_id);
  if (patch.empty()) return *t;

  const std::string s = patch.subject ? required(*patch.subject, ErrorCode::EmptyField, "subject") : t->subject;
  const std::string p = patch.predicate ? required(*patch.predicate, ErrorCode::EmptyField, "predicate") : t->predicate;
  const std::string o = patch.object ? required(*patch.object, ErrorCode::EmptyField, "object") : t->object;
  if (s == t->subject && p == t->predicate && o == t->object) return *t;

  std::uint64_t entity_counter = state().next_ids.entity;
  json new_entities = json::array();
  auto resolve = [&](const std::string& name) -> std::string {
    if (const EntityNode* e = g.find_entity(name)) return e->id;
    for (const auto& ne : new_entities) {
      if (ne["name"] == name) return ne["id"].get<std::string>();
    }
    std::string id = make_id(entity_counter++, 'e');
    new_entities.push_back(json{{"id", id}, {"name", name}});
    return id;
  };
  json after{{"subject_id", resolve(s)}, {"predicate", p}, {"object_id", resolve(o)}};
  json before{{"subject", t->subject}, {"predicate", t->predicate}, {"object", t->object}};
  after["subject"] = s;
  after["object"] = o;
  commit("triple.update", actor, triple_id,
         json{{"triple_id", triple_id},
              {"before", std::move(before)},
              {"after", std::move(after)},
              {"new_entities", std::move(new_entities)}});
  return state().triple(triple_id);
}

TripleRecord GraphStore::Writer::soft_delete_triple(const std::string& graph_id,
                                                    const std::string& triple_id,
                                                    const std::string& actor,
                                                    const std::string& reason) {
  const TripleRecord* t = state().graph(graph_id).find_triple(triple_id);
  if (t == nullptr) throw Error(ErrorCode::NotFound, "unknown triple: " + triple_id);
  if (t->deleted) throw Error(ErrorCode::AlreadyDeleted, "triple " + triple_id + " already deleted");
  ensure_document_mutable(t->provenance.document_id);
  json payload{{"triple_id", triple_id}};
  if (!reason.empty()) payload["reason"] = reason;
  commit("triple.delete", actor, triple_id, std::move(payload));
  return state().triple(triple_id);
}

TripleRecord GraphStore::Writer::restore_triple(const std::string& graph_id,
                                                const std::string& triple_id,
                                                const std::string& actor) {
  const TripleRecord* t = state().graph(graph_id).find_triple(triple_id);
  if (t == nullptr) throw Error(ErrorCode::NotFound, "unknown triple: " + triple_id);
  if (!t->deleted) throw Error(ErrorCode::NotDeleted, "triple " + triple_id + " is not deleted");
  if (t->status == TripleStatus::Rejected) {
    throw Error(ErrorCode::WrongState, "triple " + triple_id + " was rejected by finalization");
  }
  ensure_document_mutable(t->provenance.document_id);
  commit("triple.restore", actor, triple_id, json{{"triple_id", triple_id}});
  return state().triple(triple_id);
}

TripleRecord GraphStore::Writer::finalize_triple(const std::string& triple_id,
                                                 const std::string& decision,
                                                 const std::string& note,
                                                 const std::string& actor) {
  const TripleRecord& t = state().triple(triple_id);
  if (decision != "certify" && decision != "reject") {
    throw Error(ErrorCode::InvalidArgument, "final verdict must be certify or reject");
  }
  ensure_document_mutable(t.provenance.document_id);
  commit("triple.finalize", actor, triple_id,
         json{{"triple_id", triple_id}, {"decision", decision}, {"note", note}});
  return state().triple(triple_id);
}

Judgment GraphStore::Writer::record_judgment(Judgment judgment, const std::string& actor) {
  state().triple(judgment.triple_id);
  json replaces = nullptr;
  for (const auto& j : state().judgments) {
    if (j.triple_id == judgment.triple_id && j.reviewer == judgment.reviewer) replaces = j.id;
  }
  judgment.id = make_id(state().next_ids.judgment, 'j');
  judgment.created_at.clear();
  json body = judgment;
  body.erase("created_at");
  commit("judgment.submit", actor, judgment.triple_id,
         json{{"judgment", std::move(body)}, {"replaces", replaces}});
  return state().judgments.back();
}

void GraphStore::Writer::certify_document(const std::string& document_id,
                                          const std::vector<std::string>& promote,
                                          const std::vector<std::string>& reject,
                                          const std::string& actor) {
  ensure_document_mutable(document_id);
  std::size_t certified = 0;
  for (const TripleRecord* t : state().document_triples(document_id)) {
    if (t->status == TripleStatus::Certified && !t->deleted) ++certified;
  }
  commit("document.certify", actor, document_id,
         json{{"document_id", document_id},
              {"promote", promote},
              {"reject", reject},
              {"triple_count", certified + promote.size()}},
         /*sync=*/true);
}

RenameResult GraphStore::Writer::rename_entity(const std::string& graph_id,
                                               const std::string& from, const std::string& to,
                                               const std::string& actor) {
  const GraphState& g = state().graph(graph_id);
  const EntityNode& node = g.entity_by_name_or_throw(from);
  const std::string target = required(to, ErrorCode::EmptyName, "entity name");
  if (target == node.name) return RenameResult{node.id, false, 0};
  if (g.find_entity(target) != nullptr) {
    MergeOutcome m = merge_entities(graph_id, {from}, target, actor);
    return RenameResult{m.into_entity_id, true, m.collapsed};
  }
  if (auto it = g.incident.find(node.id); it != g.incident.end()) {
    for (std::size_t idx : it->second) {
      const TripleRecord& t = g.triples[idx];
      if (t.status == TripleStatus::Certified) {
        throw Error(ErrorCode::CertifiedImmutable, "entity '" + from + "' has certified triples");
      }
      ensure_document_mutable(t.provenance.document_id);
    }
  }
  const std::string entity_id = node.id;
  commit("entity.rename", actor, entity_id,
         json{{"graph_id", graph_id}, {"entity_id", entity_id}, {"from", node.name}, {"to", target}});
  return RenameResult{entity_id, false, 0};
}

MergeOutcome GraphStore::Writer::merge_entities(const std::string& graph_id,
                                                const std::vector<std::string>& from,
                                                const std::string& to, const std::string& actor) {
  const GraphState& g = state().graph(graph_id);
  const std::string target = required(to, ErrorCode::EmptyName, "entity name");
  const EntityNode* into = g.find_entity(target);
  std::set<std::string> from_ids;
  for (const auto& name : from) {
    const EntityNode& n = g.entity_by_name_or_throw(name);
    if (into == nullptr || n.id != into->id) from_ids.insert(n.id);
  }
  MergeOutcome out;
  if (from_ids.empty()) {
    out.into_entity_id = into != nullptr ? into->id : std::string{};
    return out;
  }
  const std::string into_id = into != nullptr ? into->id : make_id(state().next_ids.entity, 'e');
  auto mapped = [&](const std::string& id) { return from_ids.contains(id) ? into_id : id; };

  std::vector<std::string> redirected;
  for (const auto& t : g.triples) {
    if (!from_ids.contains(t.subject_id) && !from_ids.contains(t.object_id)) continue;
    if (t.status == TripleStatus::Certified) {
      throw Error(ErrorCode::CertifiedImmutable, "merge touches certified triple " + t.id);
    }
    ensure_document_mutable(t.provenance.document_id);
    redirected.push_back(t.id);
  }

  // Exact duplicates (same endpoints, predicate, and document) produced by the
  // redirect collapse onto the earliest surviving triple.
  std::map<std::tuple<std::string, std::string, std::string, std::string>, std::vector<const TripleRecord*>> groups;
  for (const auto& t : g.triples) {
    if (t.deleted) continue;
    groups[{mapped(t.subject_id), t.predicate, mapped(t.object_id), t.provenance.document_id}]
        .push_back(&t);
  }
  std::vector<std::string> collapsed;
  for (const auto& [key, members] : groups) {
    if (members.size() < 2) continue;
    const bool involves_redirect = std::any_of(members.begin(), members.end(), [&](const TripleRecord* t) {
      return from_ids.contains(t->subject_id) || from_ids.contains(t->object_id);
    });
    if (!involves_redirect) continue;
    for (std::size_t i = 1; i < members.size(); ++i) collapsed.push_back(members[i]->id);
  }
  std::sort(collapsed.begin(), collapsed.end(), [&](const std::string& a, const std::string& b) {
    return g.triple_by_id.at(a) < g.triple_by_id.at(b);
  });

  out.into_entity_id = into_id;
  out.redirected = redirected.size();
  out.collapsed = collapsed.size();
  out.removed_entities.assign(from_ids.begin(), from_ids.end());
  commit("entity.merge", actor, into_id,
         json{{"graph_id", graph_id},
              {"from_ids", out.removed_entities},
              {"into", json{{"id", into_id}, {"name", target}, {"created", into == nullptr}}},
              {"redirected", redirected},
              {"collapsed", collapsed},
              {"removed", out.removed_entities}});
  return out;
}

void GraphStore::Writer::audit_only(const std::string& type, const std::string& ref, json payload,
                                    const std::string& actor) {
  commit(type, actor, ref, std::move(payload));
}

}  // namespace certkg::store
