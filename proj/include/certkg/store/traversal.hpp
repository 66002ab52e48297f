#pragma once

#include "certkg/store/graph_store.hpp"

namespace certkg::store {

bool edge_passes(const TripleRecord& t, const EdgeFilter& filter);

// Breadth-first expansion over undirected edges. A node at distance d < hops
// contributes all of its qualifying incident edges; edges come back in
// insertion order and are capped at `edge_cap`.
Subgraph neighborhood(const GraphState& g, std::string_view entity_name, int hops,
                      const EdgeFilter& filter, std::size_t edge_cap);

// Simple undirected paths over non-deleted edges, at most `max_hops` edges,
// ordered by length, then node-name sequence, then edge insertion order.
std::vector<Path> simple_paths(const GraphState& g, std::string_view source,
                               std::string_view target, int max_hops, std::size_t max_paths);

GraphStats compute_stats(const GraphState& g);
GraphStats compute_stats(const std::vector<EntityNode>& nodes,
                         const std::vector<TripleRecord>& edges);

std::vector<EdgeRow> edge_rows(const GraphState& g, const EdgeFilter& filter);

}  // namespace certkg::store
