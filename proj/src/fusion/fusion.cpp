#include "certkg/fusion/fusion.hpp"

#include "certkg/error.hpp"
#include "certkg/store/traversal.hpp"
#include "certkg/text.hpp"

#include <unicode/uchar.h>

#include <algorithm>
#include <tuple>

namespace certkg::fusion {

using nlohmann::json;
using store::GraphState;
using store::StoreState;

std::string normalize_entity(std::string_view name) {
  std::string out;
  bool pending_space = false;
  for (char32_t cp : text::decode_utf8(name)) {
    const UChar32 folded = u_foldCase(static_cast<UChar32>(cp), U_FOLD_CASE_DEFAULT);
    const bool word = (U_GET_GC_MASK(folded) & (U_GC_L_MASK | U_GC_M_MASK | U_GC_N_MASK)) != 0;
    if (!word) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    text::append_utf8(out, static_cast<char32_t>(folded));
  }
  return out;
}

namespace {

std::vector<std::string> canonical_graph_list(const StoreState& state, const std::vector<std::string>& graph_ids) {
  if (graph_ids.size() < 2) throw Error(ErrorCode::NeedTwoGraphs, "fusion needs at least two graphs");
  std::vector<std::string> ids(graph_ids.begin(), graph_ids.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (const auto& id : ids) state.graph(id);
  return ids;
}

}  // namespace

OverlapReport detect_overlaps(const StoreState& state, const std::vector<std::string>& graph_ids) {
  OverlapReport r;
  r.graph_ids = canonical_graph_list(state, graph_ids);
  std::map<std::string, std::map<std::string, std::set<std::string>>> groups;
  for (const auto& gid : r.graph_ids) {
    r.per_graph_unique_counts[gid] = 0;
    for (const store::EntityNode* e : state.graph(gid).active_entities()) {
      groups[normalize_entity(e->name)][gid].insert(e->name);
    }
  }
  for (auto& [normalized, per_graph] : groups) {
    if (per_graph.size() == 1) {
      ++r.per_graph_unique_counts[per_graph.begin()->first];
      continue;
    }
    std::set<std::string> variants;
    for (const auto& [gid, names] : per_graph) variants.insert(names.begin(), names.end());
    if (variants.size() >= 2) r.naming_conflicts.push_back(NamingConflict{normalized, variants});
    r.shared_entities.push_back(SharedEntity{normalized, std::move(per_graph)});
  }
  return r;
}

OverlapReport detect_overlaps(const store::GraphStore& store, const std::vector<std::string>& graph_ids) {
  return store.read([&](const StoreState& s) { return detect_overlaps(s, graph_ids); });
}

json to_json(const OverlapReport& r) {
  json shared = json::array();
  for (const auto& s : r.shared_entities) {
    shared.push_back(json{{"normalized", s.normalized}, {"variants_per_graph", s.variants_per_graph}});
  }
  json conflicts = json::array();
  for (const auto& c : r.naming_conflicts) {
    conflicts.push_back(json{{"normalized", c.normalized}, {"variants", c.variants}});
  }
  return json{{"graph_ids", r.graph_ids},
              {"shared_entities", shared},
              {"naming_conflicts", conflicts},
              {"per_graph_unique_counts", r.per_graph_unique_counts}};
}

FusedGraph build_fused_preview(const StoreState& state, const std::vector<std::string>& graph_ids,
                               std::size_t edge_cap) {
  FusedGraph out;
  out.graph_ids = canonical_graph_list(state, graph_ids);

  std::map<std::string, FusedNode> classes;
  std::vector<std::string> class_order;
  auto touch = [&](const std::string& gid, const store::EntityNode& e) {
    const std::string norm = normalize_entity(e.name);
    auto [it, fresh] = classes.try_emplace(norm);
    if (fresh) {
      it->second.normalized = norm;
      it->second.label = e.name;
      class_order.push_back(norm);
    }
    auto& members = it->second.members;
    const bool known = std::any_of(members.begin(), members.end(), [&](const FusedMember& m) {
      return m.graph_id == gid && m.entity_id == e.id;
    });
    if (!known) members.push_back(FusedMember{gid, e.id, e.name});
    return norm;
  };

  std::vector<FusedEdge> all_edges;
  for (const auto& gid : out.graph_ids) {
    const GraphState& g = state.graph(gid);
    for (const auto& t : g.triples) {
      if (t.deleted) continue;
      const std::string s = touch(gid, g.entity(t.subject_id));
      const std::string o = touch(gid, g.entity(t.object_id));
      all_edges.push_back(FusedEdge{t.id, gid, s, t.predicate, o, t.subject, t.object});
    }
  }
  out.summary.node_count = classes.size();
  out.summary.edge_count = all_edges.size();
  for (const auto& [norm, node] : classes) out.summary.merged_class_count += node.members.size() > 1 ? 1 : 0;

  out.truncated = all_edges.size() > edge_cap;
  if (out.truncated) all_edges.resize(edge_cap);
  std::set<std::string> used;
  for (const auto& e : all_edges) {
    used.insert(e.subject);
    used.insert(e.object);
  }
  for (const auto& norm : class_order) {
    if (used.contains(norm)) out.nodes.push_back(classes.at(norm));
  }
  out.edges = std::move(all_edges);
  return out;
}

FusedGraph build_fused_preview(const store::GraphStore& store, const std::vector<std::string>& graph_ids,
                               std::size_t edge_cap) {
  return store.read([&](const StoreState& s) { return build_fused_preview(s, graph_ids, edge_cap); });
}

json to_json(const FusedGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes) {
    json members = json::array();
    for (const auto& m : n.members) {
      members.push_back(json{{"graph_id", m.graph_id}, {"entity_id", m.entity_id}, {"name", m.name}});
    }
    nodes.push_back(json{{"id", n.normalized}, {"label", n.label}, {"members", members}});
  }
  json edges = json::array();
  for (const auto& e : g.edges) {
    edges.push_back(json{{"triple_id", e.triple_id},
                         {"origin_graph", e.origin_graph},
                         {"subject", e.subject},
                         {"predicate", e.predicate},
                         {"object", e.object},
                         {"subject_original", e.subject_original},
                         {"object_original", e.object_original}});
  }
  return json{{"graph_ids", g.graph_ids},
              {"nodes", nodes},
              {"edges", edges},
              {"truncated", g.truncated},
              {"summary",
               {{"node_count", g.summary.node_count},
                {"edge_count", g.summary.edge_count},
                {"merged_class_count", g.summary.merged_class_count}}}};
}

json to_json(const MergePlan& p) {
  json actions = json::array();
  for (const auto& a : p.actions) {
    json j{{"kind", a.kind == MergeKind::Rename ? "rename" : "merge"}, {"graph_id", a.graph_id}, {"to", a.to}};
    if (a.kind == MergeKind::Rename) {
      j["from"] = a.from.empty() ? std::string() : a.from.front();
    } else {
      j["from"] = a.from;
    }
    actions.push_back(std::move(j));
  }
  return json{{"actions", actions}, {"author", p.author}, {"status", p.status}};
}

MergePlan merge_plan_from_json(const json& j) {
  auto bad = [](const std::string& why) { return Error(ErrorCode::InvalidArgument, "merge plan: " + why); };
  if (!j.is_object() || !j.contains("actions") || !j.at("actions").is_array()) throw bad("expected {\"actions\": [...]}");
  MergePlan p;
  if (j.contains("author")) {
    if (!j.at("author").is_string()) throw bad("author must be a string");
    p.author = j.at("author").get<std::string>();
  }
  if (j.contains("status")) {
    const auto& s = j.at("status");
    if (!s.is_string() || (s != "proposed" && s != "applied")) throw bad("status must be proposed or applied");
    p.status = s.get<std::string>();
  }
  for (const auto& a : j.at("actions")) {
    if (!a.is_object()) throw bad("each action must be an object");
    MergeAction act;
    const std::string kind = a.value("kind", "");
    if (kind == "rename") {
      act.kind = MergeKind::Rename;
    } else if (kind == "merge") {
      act.kind = MergeKind::Merge;
    } else {
      throw bad("kind must be rename or merge");
    }
    if (!a.contains("graph_id") || !a.at("graph_id").is_string()) throw bad("graph_id must be a string");
    if (!a.contains("to") || !a.at("to").is_string()) throw bad("to must be a string");
    act.graph_id = a.at("graph_id").get<std::string>();
    act.to = a.at("to").get<std::string>();
    const json& from = a.contains("from") ? a.at("from") : json();
    if (from.is_string()) {
      act.from.push_back(from.get<std::string>());
    } else if (from.is_array() && !from.empty() && std::all_of(from.begin(), from.end(), [](const json& x) {
                 return x.is_string();
               })) {
      act.from = from.get<std::vector<std::string>>();
    } else {
      throw bad("from must be a name or a non-empty list of names");
    }
    if (act.kind == MergeKind::Rename && act.from.size() != 1) throw bad("rename takes exactly one source name");
    p.actions.push_back(std::move(act));
  }
  return p;
}

json to_json(const MergeResult& r) {
  json stats = json::object();
  for (const auto& [gid, s] : r.resulting_stats) stats[gid] = s;
  return json{{"renamed", r.renamed},
              {"merged", r.merged},
              {"collapsed", r.collapsed},
              {"resulting_stats", stats},
              {"plan", to_json(r.plan)}};
}

namespace {

void validate_plan(const StoreState& state, const MergePlan& plan) {
  std::set<std::pair<std::string, std::string>> touched;
  auto claim = [&](const std::string& gid, const std::string& name) {
    if (!touched.emplace(gid, name).second) {
      throw Error(ErrorCode::PlanConflict, "more than one action touches '" + name + "' in graph " + gid,
                  json{{"graph_id", gid}, {"entity", name}});
    }
  };
  for (const auto& a : plan.actions) {
    const GraphState& g = state.graph(a.graph_id);
    if (text::trim(a.to).empty()) throw Error(ErrorCode::EmptyName, "merge target must be non-empty");
    std::set<std::string> names(a.from.begin(), a.from.end());
    names.insert(a.to);
    for (const auto& n : names) claim(a.graph_id, n);
    for (const auto& name : a.from) {
      const store::EntityNode& e = g.entity_by_name_or_throw(name);
      auto it = g.incident.find(e.id);
      if (it == g.incident.end()) continue;
      for (std::size_t idx : it->second) {
        const store::TripleRecord& t = g.triples[idx];
        if (t.status == store::TripleStatus::Certified) {
          throw Error(ErrorCode::CertifiedImmutable, "'" + name + "' has certified triple " + t.id);
        }
        if (state.document(t.provenance.document_id).state == store::DocumentState::Certified) {
          throw Error(ErrorCode::CertifiedImmutable, "document " + t.provenance.document_id + " is certified");
        }
      }
    }
  }
}

}  // namespace

MergeResult apply_merge_plan(store::GraphStore& store, const governance::Actor& actor, const MergePlan& plan) {
  governance::require(actor, governance::Action::FusionMerge);
  if (plan.status != "proposed") throw Error(ErrorCode::WrongState, "merge plan was already applied");
  return store.write([&](store::GraphStore::Writer& w) {
    validate_plan(w.state(), plan);
    MergeResult r;
    std::set<std::string> graphs;
    for (const auto& a : plan.actions) {
      graphs.insert(a.graph_id);
      if (a.kind == MergeKind::Rename) {
        const store::RenameResult rr = w.rename_entity(a.graph_id, a.from.front(), a.to, actor.id);
        if (rr.coerced_to_merge) {
          ++r.merged;
          r.collapsed += rr.collapsed;
        } else {
          ++r.renamed;
        }
      } else {
        const store::MergeOutcome m = w.merge_entities(a.graph_id, a.from, a.to, actor.id);
        ++r.merged;
        r.collapsed += m.collapsed;
      }
    }
    for (const auto& gid : graphs) r.resulting_stats[gid] = store::compute_stats(w.state().graph(gid));
    r.plan = plan;
    r.plan.status = "applied";
    if (r.plan.author.empty()) r.plan.author = actor.id;
    return r;
  });
}

}  // namespace certkg::fusion
