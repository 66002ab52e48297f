#include "certkg/store/traversal.hpp"

#include "certkg/error.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

namespace certkg::store {

bool edge_passes(const TripleRecord& t, const EdgeFilter& filter) {
  if (t.deleted && !filter.include_deleted) return false;
  if (filter.predicates && !filter.predicates->contains(t.predicate)) return false;
  if (filter.document_ids && !filter.document_ids->contains(t.provenance.document_id)) {
    return false;
  }
  if (filter.statuses && !filter.statuses->contains(t.status)) return false;
  return true;
}

Subgraph neighborhood(const GraphState& g, std::string_view entity_name, int hops,
                      const EdgeFilter& filter, std::size_t edge_cap) {
  if (hops < 1) throw Error(ErrorCode::InvalidArgument, "hops must be positive");
  if (edge_cap < 1) throw Error(ErrorCode::InvalidArgument, "edge cap must be positive");
  const EntityNode& start = g.entity_by_name_or_throw(entity_name);

  std::unordered_map<std::string, int> dist{{start.id, 0}};
  std::vector<std::string> order{start.id};
  std::deque<std::string> queue{start.id};
  std::vector<std::size_t> edge_idx;
  std::unordered_set<std::size_t> seen_edges;

  while (!queue.empty()) {
    const std::string u = queue.front();
    queue.pop_front();
    const int d = dist.at(u);
    if (d >= hops) continue;
    auto it = g.incident.find(u);
    if (it == g.incident.end()) continue;
    for (std::size_t idx : it->second) {
      const TripleRecord& t = g.triples[idx];
      if (!edge_passes(t, filter)) continue;
      if (seen_edges.insert(idx).second) edge_idx.push_back(idx);
      const std::string& v = t.subject_id == u ? t.object_id : t.subject_id;
      if (!dist.contains(v)) {
        dist.emplace(v, d + 1);
        order.push_back(v);
        queue.push_back(v);
      }
    }
  }

  std::sort(edge_idx.begin(), edge_idx.end());
  Subgraph out;
  if (edge_idx.size() > edge_cap) {
    edge_idx.resize(edge_cap);
    out.truncated = true;
  }
  std::unordered_set<std::string> keep;
  for (std::size_t idx : edge_idx) {
    out.edges.push_back(g.triples[idx]);
    keep.insert(g.triples[idx].subject_id);
    keep.insert(g.triples[idx].object_id);
  }
  keep.insert(start.id);
  for (const auto& id : order) {
    if (!out.truncated || keep.contains(id)) out.nodes.push_back(g.entity(id));
  }
  out.stats = compute_stats(out.nodes, out.edges);
  return out;
}

namespace {

struct PathSearch {
  const GraphState& g;
  const std::string& target;
  int max_hops;
  std::unordered_map<std::string, int> to_target;
  std::vector<std::string> node_ids;
  std::vector<std::size_t> edges;
  std::unordered_set<std::string> on_path;
  std::vector<std::pair<std::vector<std::string>, std::vector<std::size_t>>> found;

  void distances_to_target() {
    to_target[target] = 0;
    std::deque<std::string> queue{target};
    while (!queue.empty()) {
      const std::string u = queue.front();
      queue.pop_front();
      const int d = to_target.at(u);
      if (d >= max_hops) continue;
      auto it = g.incident.find(u);
      if (it == g.incident.end()) continue;
      for (std::size_t idx : it->second) {
        const TripleRecord& t = g.triples[idx];
        if (t.deleted) continue;
        const std::string& v = t.subject_id == u ? t.object_id : t.subject_id;
        if (!to_target.contains(v)) {
          to_target.emplace(v, d + 1);
          queue.push_back(v);
        }
      }
    }
  }

  void dfs(const std::string& u) {
    if (u == target) {
      found.emplace_back(node_ids, edges);
      return;
    }
    const int depth = static_cast<int>(edges.size());
    auto it = g.incident.find(u);
    if (it == g.incident.end()) return;
    for (std::size_t idx : it->second) {
      const TripleRecord& t = g.triples[idx];
      if (t.deleted) continue;
      const std::string& v = t.subject_id == u ? t.object_id : t.subject_id;
      if (on_path.contains(v)) continue;
      auto d = to_target.find(v);
      if (d == to_target.end() || depth + 1 + d->second > max_hops) continue;
      on_path.insert(v);
      node_ids.push_back(v);
      edges.push_back(idx);
      dfs(v);
      edges.pop_back();
      node_ids.pop_back();
      on_path.erase(v);
    }
  }
};

}  // namespace

std::vector<Path> simple_paths(const GraphState& g, std::string_view source,
                               std::string_view target, int max_hops, std::size_t max_paths) {
  if (max_hops < 1) throw Error(ErrorCode::InvalidArgument, "max_hops must be positive");
  if (max_paths < 1) throw Error(ErrorCode::InvalidArgument, "max_paths must be positive");
  const EntityNode& src = g.entity_by_name_or_throw(source);
  const EntityNode& dst = g.entity_by_name_or_throw(target);
  if (src.id == dst.id) return {};

  PathSearch search{g, dst.id, max_hops, {}, {src.id}, {}, {src.id}, {}};
  search.distances_to_target();
  if (!search.to_target.contains(src.id)) return {};
  search.dfs(src.id);

  struct Keyed {
    Path path;
    std::vector<std::size_t> edge_idx;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(search.found.size());
  for (auto& [ids, idx] : search.found) {
    Keyed k;
    for (const auto& id : ids) k.path.nodes.push_back(g.entity(id).name);
    for (std::size_t i : idx) k.path.edge_ids.push_back(g.triples[i].id);
    k.edge_idx = std::move(idx);
    keyed.push_back(std::move(k));
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    if (a.edge_idx.size() != b.edge_idx.size()) return a.edge_idx.size() < b.edge_idx.size();
    if (a.path.nodes != b.path.nodes) return a.path.nodes < b.path.nodes;
    return a.edge_idx < b.edge_idx;
  });
  std::vector<Path> out;
  for (auto& k : keyed) {
    if (out.size() == max_paths) break;
    out.push_back(std::move(k.path));
  }
  return out;
}

GraphStats compute_stats(const GraphState& g) {
  GraphStats s;
  for (const auto& t : g.triples) {
    if (t.deleted) {
      ++s.deleted_count;
      continue;
    }
    ++s.edge_count;
    ++s.predicate_histogram[t.predicate];
  }
  s.node_count = g.active_entities().size();
  return s;
}

GraphStats compute_stats(const std::vector<EntityNode>& nodes,
                         const std::vector<TripleRecord>& edges) {
  GraphStats s;
  s.node_count = nodes.size();
  for (const auto& t : edges) {
    if (t.deleted) {
      ++s.deleted_count;
      continue;
    }
    ++s.edge_count;
    ++s.predicate_histogram[t.predicate];
  }
  return s;
}

std::vector<EdgeRow> edge_rows(const GraphState& g, const EdgeFilter& filter) {
  std::vector<EdgeRow> rows;
  for (const auto& t : g.triples) {
    if (!edge_passes(t, filter)) continue;
    rows.push_back(EdgeRow{t.id, t.subject, t.predicate, t.object, t.provenance.document_id,
                           t.provenance.page, t.status, t.deleted});
  }
  return rows;
}

}  // namespace certkg::store
