#include "certkg/tasks/tasks.hpp"

#include "certkg/error.hpp"
#include "certkg/fusion/fusion.hpp"
#include "certkg/store/traversal.hpp"
#include "certkg/text.hpp"

#include <algorithm>
#include <sstream>

namespace certkg::tasks {

using nlohmann::json;
using store::GraphState;
using store::StoreState;
using store::TripleRecord;

const std::set<std::string>& stop_words() {
  static const std::set<std::string> words{
      "a",       "about",   "above",  "after",   "again",  "against", "all",     "am",     "an",      "and",
      "any",     "are",     "as",     "at",      "be",     "because", "been",    "before", "being",   "below",
      "between", "both",    "but",    "by",      "can",    "could",   "did",     "do",     "does",    "doing",
      "down",    "during",  "each",   "either",  "else",   "ever",    "every",   "few",    "for",     "from",
      "further", "get",     "gets",   "give",    "had",    "has",     "have",    "having", "he",      "her",
      "here",    "hers",    "herself", "him",    "himself", "his",    "how",     "i",      "if",      "in",
      "into",    "is",      "it",     "its",     "itself", "just",    "let",     "list",   "may",     "me",
      "might",   "more",    "most",   "much",    "must",   "my",      "myself",  "no",     "nor",     "not",
      "now",     "of",      "off",    "on",      "once",   "only",    "or",      "other",  "our",     "ours",
      "ourselves", "out",   "over",   "own",     "please", "same",    "shall",   "she",    "should",  "show",
      "so",      "some",    "such",   "tell",    "than",   "that",    "the",     "their",  "theirs",  "them",
      "themselves", "then", "there",  "these",   "they",   "this",    "those",   "through", "to",     "too",
      "under",   "until",   "up",     "upon",    "us",     "very",    "was",     "we",     "were",    "what",
      "whatever", "when",   "where",  "whether", "which",  "while",   "who",     "whom",   "whose",   "why",
      "will",    "with",    "within", "without", "would",  "yet",     "you",     "your",   "yours",   "yourself",
      "also",    "any",     "anything", "describe", "explain", "find", "know",   "many",   "s",       "t",
      "there's", "want",    "way",    "ways",    "well",   "being",   "via",     "etc"};
  return words;
}

std::vector<std::string> extract_keywords(std::string_view question) {
  std::vector<std::string> tokens;
  std::istringstream in(fusion::normalize_entity(question));
  for (std::string tok; in >> tok;) {
    if (!stop_words().contains(tok)) tokens.push_back(tok);
  }
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto add = [&](const std::string& k) {
    if (seen.insert(k).second) out.push_back(k);
  };
  for (const auto& t : tokens) add(t);
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) add(tokens[i] + " " + tokens[i + 1]);
  return out;
}

std::vector<EntityMatch> match_entities(const StoreState& state, const std::vector<std::string>& keywords,
                                        const std::string& graph_id) {
  const GraphState& g = state.graph(graph_id);
  std::vector<std::string> normalized;
  for (const auto& k : keywords) normalized.push_back(fusion::normalize_entity(k));
  std::vector<EntityMatch> out;
  for (const store::EntityNode* e : g.active_entities()) {
    const std::string name_norm = fusion::normalize_entity(e->name);
    int score = 0;
    for (std::size_t i = 0; i < keywords.size(); ++i) {
      if (keywords[i].empty()) continue;
      if (!normalized[i].empty() && normalized[i] == name_norm) {
        score += 2;
      } else if (text::icontains(e->name, keywords[i])) {
        score += 1;
      }
    }
    if (score > 0) out.push_back(EntityMatch{e->name, score});
  }
  std::sort(out.begin(), out.end(), [](const EntityMatch& a, const EntityMatch& b) {
    return a.score != b.score ? a.score > b.score : a.entity < b.entity;
  });
  return out;
}

namespace {

void check_hops(int hops) {
  if (hops < 0 || hops > kMaxTaskHops) {
    throw Error(ErrorCode::InvalidArgument, "hops must be within [0, " + std::to_string(kMaxTaskHops) + "]");
  }
}

}  // namespace

KgqaResult kgqa_retrieve(const StoreState& state, const std::string& question, const std::string& graph_id,
                         const KgqaOptions& options) {
  check_hops(options.hops);
  const GraphState& g = state.graph(graph_id);
  KgqaResult r;
  r.keywords = extract_keywords(question);
  r.matched_entities = match_entities(state, r.keywords, graph_id);
  if (r.matched_entities.empty()) {
    throw Error(ErrorCode::NoEntityMatch, "no entity matches the question", json{{"keywords", r.keywords}});
  }
  if (r.matched_entities.size() > options.top_k) r.matched_entities.resize(options.top_k);

  std::set<std::string> node_ids;
  std::set<std::string> edge_ids;
  std::vector<const TripleRecord*> edges;
  for (const auto& m : r.matched_entities) {
    const store::Subgraph sub = store::neighborhood(g, m.entity, options.hops, {}, options.edge_cap);
    r.evidence_subgraph.truncated = r.evidence_subgraph.truncated || sub.truncated;
    for (const auto& n : sub.nodes) node_ids.insert(n.id);
    for (const auto& e : sub.edges) {
      if (edge_ids.insert(e.id).second) edges.push_back(g.find_triple(e.id));
    }
  }
  std::sort(edges.begin(), edges.end(), [](const TripleRecord* a, const TripleRecord* b) { return a->seq < b->seq; });
  if (edges.size() > options.edge_cap) {
    edges.resize(options.edge_cap);
    r.evidence_subgraph.truncated = true;
  }
  for (const TripleRecord* t : edges) {
    r.evidence_subgraph.edges.push_back(*t);
    r.provenance.push_back(t->provenance);
    node_ids.insert(t->subject_id);
    node_ids.insert(t->object_id);
  }
  for (const auto& e : g.entities) {
    if (node_ids.contains(e.id)) r.evidence_subgraph.nodes.push_back(e);
  }
  r.evidence_subgraph.stats = store::compute_stats(r.evidence_subgraph.nodes, r.evidence_subgraph.edges);
  if (r.matched_entities.size() >= 2 && options.hops > 0) {
    r.reasoning_paths = store::simple_paths(g, r.matched_entities[0].entity, r.matched_entities[1].entity,
                                            options.hops, options.max_paths);
  }
  return r;
}

ingest::LlmRequest kgqa_request(const KgqaResult& symbolic, const std::string& question, const KgqaLlm& llm) {
  std::string facts;
  for (const auto& e : symbolic.evidence_subgraph.edges) {
    facts += e.subject + " | " + e.predicate + " | " + e.object + " | " + e.provenance.document_id + " | " +
             (e.provenance.page ? std::to_string(*e.provenance.page) : std::string("-")) + "\n";
  }
  return ingest::LlmRequest{
      llm.model_id, llm.prompts->get("kgqa.system"),
      ingest::render(llm.prompts->get("kgqa.user"), {{"question", question}, {"facts", facts}}), 0.0};
}

KgqaResult kgqa(const store::GraphStore& store, const std::string& question, const std::string& graph_id,
                const KgqaOptions& options, const std::optional<KgqaLlm>& llm) {
  KgqaResult r = store.read([&](const StoreState& s) { return kgqa_retrieve(s, question, graph_id, options); });
  if (llm && llm->client != nullptr && llm->prompts != nullptr) {
    try {
      r.answer = text::trim(llm->client->complete(kgqa_request(r, question, *llm)).text);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::LlmUnavailable && e.code() != ErrorCode::ReplayMiss) throw;
      r.answer_error = std::string(error_code_name(e.code()));
    }
  }
  return r;
}

json to_json(const KgqaResult& r) {
  json matches = json::array();
  for (const auto& m : r.matched_entities) matches.push_back(json{{"entity", m.entity}, {"score", m.score}});
  json j{{"keywords", r.keywords},
         {"matched_entities", matches},
         {"answer", r.answer ? json(*r.answer) : json(nullptr)},
         {"reasoning_paths", r.reasoning_paths},
         {"evidence_subgraph", r.evidence_subgraph},
         {"provenance", r.provenance}};
  if (r.answer_error) j["answer_error"] = *r.answer_error;
  return j;
}

store::Subgraph bounded_hop(const store::GraphStore& store, const std::string& graph_id, const std::string& entity,
                            int hops, const store::EdgeFilter& filter, std::size_t edge_cap) {
  check_hops(hops);
  return store.query_neighborhood(graph_id, entity, hops, filter, edge_cap);
}

std::vector<store::Path> path_search(const store::GraphStore& store, const std::string& graph_id,
                                     const std::string& source, const std::string& target, int max_hops,
                                     std::size_t max_paths) {
  check_hops(max_hops);
  return store.find_paths(graph_id, source, target, max_hops, max_paths);
}

ComparisonReport compare_entities(const StoreState& state, const std::string& graph_id,
                                  const std::vector<std::string>& entities) {
  const GraphState& g = state.graph(graph_id);
  ComparisonReport r;
  for (const auto& raw : entities) {
    const std::string name = text::trim(raw);
    if (std::find(r.entities.begin(), r.entities.end(), name) == r.entities.end()) r.entities.push_back(name);
  }
  if (r.entities.size() < 2) throw Error(ErrorCode::TooFewEntities, "compare needs at least two distinct entities");
  if (r.entities.size() > 5) throw Error(ErrorCode::InvalidArgument, "compare takes at most five entities");

  std::map<std::string, std::set<std::string>> predicates;
  for (const auto& name : r.entities) {
    const store::EntityNode& e = g.entity_by_name_or_throw(name);
    std::size_t count = 0;
    auto& preds = predicates[name];
    if (auto it = g.incident.find(e.id); it != g.incident.end()) {
      for (std::size_t idx : it->second) {
        const TripleRecord& t = g.triples[idx];
        if (t.deleted) continue;
        ++count;
        preds.insert(t.predicate);
      }
    }
    r.fact_counts[name] = count;
  }
  r.shared_predicates = predicates.at(r.entities.front());
  for (const auto& name : r.entities) {
    std::set<std::string> keep;
    for (const auto& p : r.shared_predicates) {
      if (predicates.at(name).contains(p)) keep.insert(p);
    }
    r.shared_predicates = std::move(keep);
  }
  for (const auto& name : r.entities) {
    auto& unique = r.unique_predicates[name];
    for (const auto& p : predicates.at(name)) {
      const bool elsewhere = std::any_of(r.entities.begin(), r.entities.end(), [&](const std::string& other) {
        return other != name && predicates.at(other).contains(p);
      });
      if (!elsewhere) unique.insert(p);
    }
  }
  return r;
}

json to_json(const ComparisonReport& r) {
  return json{{"entities", r.entities},
              {"fact_counts", r.fact_counts},
              {"shared_predicates", r.shared_predicates},
              {"unique_predicates", r.unique_predicates}};
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  const auto x = text::decode_utf8(a);
  const auto y = text::decode_utf8(b);
  std::vector<std::size_t> prev(y.size() + 1), cur(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1)});
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

std::vector<DuplicatePair> detect_duplicates(const StoreState& state, const std::string& graph_id,
                                             std::size_t max_edit_distance) {
  const GraphState& g = state.graph(graph_id);
  struct Named {
    std::string name, norm;
    std::size_t length;
  };
  std::vector<Named> names;
  for (const store::EntityNode* e : g.active_entities()) {
    std::string norm = fusion::normalize_entity(e->name);
    const std::size_t len = text::code_point_length(norm);
    names.push_back(Named{e->name, std::move(norm), len});
  }
  std::sort(names.begin(), names.end(), [](const Named& a, const Named& b) { return a.name < b.name; });
  constexpr std::size_t kLengthFloor = 4;
  std::vector<DuplicatePair> out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (std::size_t j = i + 1; j < names.size(); ++j) {
      const Named& a = names[i];
      const Named& b = names[j];
      if (a.norm == b.norm) {
        out.push_back(DuplicatePair{a.name, b.name, "normalized_equal", 0});
        continue;
      }
      if (std::min(a.length, b.length) < kLengthFloor) continue;
      const std::size_t gap = a.length > b.length ? a.length - b.length : b.length - a.length;
      if (gap > max_edit_distance) continue;
      const std::size_t d = edit_distance(a.norm, b.norm);
      if (d <= max_edit_distance) out.push_back(DuplicatePair{a.name, b.name, "edit_distance", d});
    }
  }
  return out;
}

json to_json(const std::vector<DuplicatePair>& pairs) {
  json arr = json::array();
  for (const auto& p : pairs) {
    arr.push_back(json{{"name_a", p.name_a}, {"name_b", p.name_b}, {"reason", p.reason}, {"distance", p.distance}});
  }
  return arr;
}

Checklist default_checklist(store::Standard standard) {
  const Topic governance{"governance", {"governance", "board", "oversight", "committee"}};
  const Topic strategy{"strategy", {"strategy", "scenario", "resilience", "transition plan"}};
  const Topic risk{"risk management",
                   {"risk management", "risk identification", "risk assessment", "risk process", "enterprise risk"}};
  const Topic metrics{"metrics & targets",
                      {"metric", "target", "scope 1", "scope 2", "scope 3", "emission", "baseline"}};
  switch (standard) {
    case store::Standard::Tcfd:
    case store::Standard::IfrsS2:
      return {governance, strategy, risk, metrics};
    case store::Standard::Sasb:
      return {{"metrics and values", {"metric", "%", "percent", "rate", "total"}},
              {"targets and timelines", {"target", "goal", "deadline", "milestone", "by 20"}},
              governance,
              {"policies and controls", {"policy", "control", "procedure", "risk management"}},
              {"scope qualifiers", {"scope 1", "scope 2", "scope 3", "boundary", "geograph"}}};
    case store::Standard::Gri:
      return {{"governance and ethics", {"governance", "ethic", "anti-corruption", "compliance", "grievance"}},
              {"social", {"labor", "labour", "health and safety", "diversity", "human rights", "training", "communit"}},
              {"environmental", {"energy", "emission", "water", "biodiversity", "waste", "material"}},
              {"quantitative disclosures", {"%", "percent", "rate", "total", "baseline"}},
              {"policies and programs", {"policy", "program", "programme", "initiative"}}};
    case store::Standard::Unknown:
      break;
  }
  return {governance, strategy, risk, metrics, {"environment", {"emission", "energy", "water", "waste"}},
          {"social", {"employee", "safety", "human rights", "communit"}}};
}

Checklist checklist_for_graph(const StoreState& state, const std::string& graph_id) {
  state.graph(graph_id);
  for (const auto& id : state.document_order) {
    const store::DocumentRecord& d = state.documents.at(id);
    if (d.graph_id == graph_id && d.standard != store::Standard::Unknown) return default_checklist(d.standard);
  }
  return default_checklist(store::Standard::Unknown);
}

Checklist checklist_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidArgument, "checklist must be a list of topics");
  Checklist out;
  for (const auto& t : j) {
    if (!t.is_object() || !t.contains("name") || !t.at("name").is_string() || !t.contains("keywords") ||
        !t.at("keywords").is_array()) {
      throw Error(ErrorCode::InvalidArgument, "each topic needs a name and a keywords list");
    }
    Topic topic{t.at("name").get<std::string>(), {}};
    for (const auto& k : t.at("keywords")) {
      if (!k.is_string() || k.get<std::string>().empty()) {
        throw Error(ErrorCode::InvalidArgument, "topic keywords must be non-empty strings");
      }
      topic.keywords.push_back(k.get<std::string>());
    }
    out.push_back(std::move(topic));
  }
  return out;
}

GapReport coverage_gaps(const StoreState& state, const std::string& graph_id, const Checklist& checklist) {
  const GraphState& g = state.graph(graph_id);
  GapReport r;
  for (const auto& topic : checklist) {
    std::size_t hits = 0;
    for (const auto& t : g.triples) {
      if (t.deleted) continue;
      const std::string joined = t.subject + " " + t.predicate + " " + t.object;
      if (std::any_of(topic.keywords.begin(), topic.keywords.end(),
                      [&](const std::string& k) { return text::icontains(joined, k); })) {
        ++hits;
      }
    }
    r.topic_hits[topic.name] = hits;
    if (hits == 0) r.missing_topics.push_back(topic.name);
    if (hits == 1) r.thin_topics.push_back(topic.name);
  }
  std::map<std::string, std::size_t> degree;
  for (const auto& t : g.triples) {
    if (t.deleted) continue;
    ++degree[t.subject_id];
    ++degree[t.object_id];
  }
  for (const auto& e : g.entities) {
    if (auto it = degree.find(e.id); it != degree.end() && it->second == 1) r.degree_one_entities.push_back(e.name);
  }
  return r;
}

json to_json(const GapReport& r) {
  return json{{"missing_topics", r.missing_topics},
              {"thin_topics", r.thin_topics},
              {"topic_hits", r.topic_hits},
              {"degree_one_entities", r.degree_one_entities}};
}

const std::set<std::string>& generic_subject_terms() {
  static const std::set<std::string> terms{"company", "it", "this", "the company", "organization"};
  return terms;
}

DiagnosticsReport schema_diagnostics(const StoreState& state, const std::string& graph_id) {
  const GraphState& g = state.graph(graph_id);
  DiagnosticsReport r;
  std::map<std::string, std::set<std::string>> by_folded;
  std::map<std::string, std::size_t> usage;
  for (const auto& t : g.triples) {
    if (t.deleted) continue;
    by_folded[text::collapse_whitespace(text::ascii_lower(t.predicate))].insert(t.predicate);
    ++usage[t.predicate];
    if (generic_subject_terms().contains(fusion::normalize_entity(t.subject))) {
      r.generic_subjects.emplace_back(t.id, t.subject);
    }
  }
  for (auto& [folded, raw] : by_folded) {
    if (raw.size() >= 2) r.predicate_variants[folded] = std::move(raw);
  }
  for (const auto& [p, n] : usage) {
    if (n == 1) r.singleton_predicates.push_back(p);
  }
  return r;
}

json to_json(const DiagnosticsReport& r) {
  json generic = json::array();
  for (const auto& [id, subject] : r.generic_subjects) generic.push_back(json{{"triple_id", id}, {"subject", subject}});
  json variants = json::array();
  for (const auto& [folded, raw] : r.predicate_variants) {
    variants.push_back(json{{"normalized", folded}, {"variants", raw}});
  }
  return json{{"predicate_variants", variants},
              {"singleton_predicates", r.singleton_predicates},
              {"generic_subjects", generic}};
}

std::vector<TripleRecord> provenance_trace(const StoreState& state, const std::string& graph_id,
                                           const TraceFilter& filter) {
  const GraphState& g = state.graph(graph_id);
  std::vector<TripleRecord> out;
  for (const auto& t : g.triples) {
    if (t.deleted) continue;
    if (filter.entity && t.subject != *filter.entity && t.object != *filter.entity) continue;
    if (filter.predicate && t.predicate != *filter.predicate) continue;
    if (filter.document_id && t.provenance.document_id != *filter.document_id) continue;
    if (filter.page && t.provenance.page != filter.page) continue;
    out.push_back(t);
  }
  return out;
}

json trace_to_json(const std::vector<TripleRecord>& rows) {
  json arr = json::array();
  for (const auto& t : rows) arr.push_back(json{{"triple", t}, {"provenance", t.provenance}});
  return arr;
}

}  // namespace certkg::tasks
