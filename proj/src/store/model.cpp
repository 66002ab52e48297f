#include "certkg/store/model.hpp"

#include "certkg/error.hpp"

namespace certkg::store {
namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

}  // namespace

std::string_view to_string(TripleStatus s) {
  switch (s) {
    case TripleStatus::Draft: return "Draft";
    case TripleStatus::Certified: return "Certified";
    case TripleStatus::Rejected: return "Rejected";
  }
  return "Draft";
}

std::string_view to_string(Origin o) {
  return o == Origin::LlmExtraction ? "LlmExtraction" : "ExpertAdded";
}

std::string_view to_string(DocumentState s) {
  switch (s) {
    case DocumentState::Ingesting: return "Ingesting";
    case DocumentState::Draft: return "Draft";
    case DocumentState::UnderReview: return "UnderReview";
    case DocumentState::Certified: return "Certified";
  }
  return "Draft";
}

std::string_view to_string(Standard s) {
  switch (s) {
    case Standard::Sasb: return "sasb";
    case Standard::Gri: return "gri";
    case Standard::IfrsS2: return "ifrs_s2";
    case Standard::Tcfd: return "tcfd";
    case Standard::Unknown: return "unknown";
  }
  return "unknown";
}

TripleStatus parse_triple_status(std::string_view s) {
  if (s == "Draft") return TripleStatus::Draft;
  if (s == "Certified") return TripleStatus::Certified;
  if (s == "Rejected") return TripleStatus::Rejected;
  throw Error(ErrorCode::InvalidArgument, "unknown triple status: " + std::string(s));
}

Origin parse_origin(std::string_view s) {
  if (s == "LlmExtraction") return Origin::LlmExtraction;
  if (s == "ExpertAdded") return Origin::ExpertAdded;
  throw Error(ErrorCode::InvalidArgument, "unknown origin: " + std::string(s));
}

DocumentState parse_document_state(std::string_view s) {
  if (s == "Ingesting") return DocumentState::Ingesting;
  if (s == "Draft") return DocumentState::Draft;
  if (s == "UnderReview") return DocumentState::UnderReview;
  if (s == "Certified") return DocumentState::Certified;
  throw Error(ErrorCode::InvalidArgument, "unknown document state: " + std::string(s));
}

std::optional<Standard> parse_standard(std::string_view s) {
  if (s == "sasb") return Standard::Sasb;
  if (s == "gri") return Standard::Gri;
  if (s == "ifrs_s2") return Standard::IfrsS2;
  if (s == "tcfd") return Standard::Tcfd;
  if (s == "unknown") return Standard::Unknown;
  return std::nullopt;
}

std::string_view to_string(ReviewAction a) {
  switch (a) {
    case ReviewAction::Keep: return "keep";
    case ReviewAction::Edit: return "edit";
    case ReviewAction::Delete: return "delete";
  }
  return "keep";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Correct: return "CORRECT";
    case Verdict::NeedsImprovement: return "NEEDS_IMPROVEMENT";
    case Verdict::Incorrect: return "INCORRECT";
  }
  return "CORRECT";
}

std::optional<ReviewAction> parse_review_action(std::string_view s) {
  if (s == "keep") return ReviewAction::Keep;
  if (s == "edit") return ReviewAction::Edit;
  if (s == "delete") return ReviewAction::Delete;
  return std::nullopt;
}

std::optional<Verdict> parse_verdict(std::string_view s) {
  if (s == "CORRECT") return Verdict::Correct;
  if (s == "NEEDS_IMPROVEMENT") return Verdict::NeedsImprovement;
  if (s == "INCORRECT") return Verdict::Incorrect;
  return std::nullopt;
}

void to_json(json& j, const Provenance& p) {
  j = json{{"document_id", p.document_id}};
  put_optional(j, "page", p.page);
  put_optional(j, "chunk_index", p.chunk_index);
  put_optional(j, "evidence_sentence", p.evidence_sentence);
}

void from_json(const json& j, Provenance& p) {
  p.document_id = j.at("document_id").get<std::string>();
  p.page = get_optional<int>(j, "page");
  p.chunk_index = get_optional<int>(j, "chunk_index");
  p.evidence_sentence = get_optional<std::string>(j, "evidence_sentence");
}

void to_json(json& j, const EntityNode& e) {
  j = json{{"id", e.id},
           {"graph_id", e.graph_id},
           {"name", e.name},
           {"created_at", e.created_at},
           {"created_by", e.created_by}};
}

void from_json(const json& j, EntityNode& e) {
  e.id = j.at("id").get<std::string>();
  e.graph_id = j.at("graph_id").get<std::string>();
  e.name = j.at("name").get<std::string>();
  e.created_at = j.at("created_at").get<std::string>();
  e.created_by = j.at("created_by").get<std::string>();
}

void to_json(json& j, const MetaVerdict& m) {
  j = json{{"decision", m.decision}, {"by", m.by}, {"note", m.note}, {"at", m.at}};
}

void from_json(const json& j, MetaVerdict& m) {
  m.decision = j.at("decision").get<std::string>();
  m.by = j.at("by").get<std::string>();
  m.note = j.at("note").get<std::string>();
  m.at = j.at("at").get<std::string>();
}

void to_json(json& j, const TripleRecord& t) {
  j = json{{"id", t.id},
           {"graph_id", t.graph_id},
           {"subject_id", t.subject_id},
           {"subject", t.subject},
           {"predicate", t.predicate},
           {"object_id", t.object_id},
           {"object", t.object},
           {"status", to_string(t.status)},
           {"deleted", t.deleted},
           {"provenance", t.provenance},
           {"origin", to_string(t.origin)},
           {"created_by", t.created_by},
           {"created_at", t.created_at},
           {"last_updated_by", t.last_updated_by},
           {"last_updated_at", t.last_updated_at},
           {"seq", t.seq}};
  put_optional(j, "meta_verdict", t.meta);
}

void from_json(const json& j, TripleRecord& t) {
  t.id = j.at("id").get<std::string>();
  t.graph_id = j.at("graph_id").get<std::string>();
  t.subject_id = j.at("subject_id").get<std::string>();
  t.subject = j.at("subject").get<std::string>();
  t.predicate = j.at("predicate").get<std::string>();
  t.object_id = j.at("object_id").get<std::string>();
  t.object = j.at("object").get<std::string>();
  t.status = parse_triple_status(j.at("status").get<std::string>());
  t.deleted = j.at("deleted").get<bool>();
  t.provenance = j.at("provenance").get<Provenance>();
  t.origin = parse_origin(j.at("origin").get<std::string>());
  t.created_by = j.at("created_by").get<std::string>();
  t.created_at = j.at("created_at").get<std::string>();
  t.last_updated_by = j.at("last_updated_by").get<std::string>();
  t.last_updated_at = j.at("last_updated_at").get<std::string>();
  t.seq = j.value("seq", std::size_t{0});
  t.meta = get_optional<MetaVerdict>(j, "meta_verdict");
}

void to_json(json& j, const PageText& p) { j = json{{"page", p.page}, {"text", p.text}}; }

void from_json(const json& j, PageText& p) {
  p.page = j.at("page").get<int>();
  p.text = j.at("text").get<std::string>();
}

json document_summary(const DocumentRecord& d) {
  json j{{"id", d.id},
         {"graph_id", d.graph_id},
         {"title", d.title},
         {"source_file", d.source_file},
         {"standard", to_string(d.standard)},
         {"state", to_string(d.state)},
         {"page_count", d.pages.size()},
         {"created_at", d.created_at},
         {"created_by", d.created_by}};
  put_optional(j, "certified_at", d.certified_at);
  put_optional(j, "certified_by", d.certified_by);
  return j;
}

void to_json(json& j, const DocumentRecord& d) {
  j = document_summary(d);
  j["pages"] = d.pages;
  j["report"] = d.report;
}

void from_json(const json& j, DocumentRecord& d) {
  d.id = j.at("id").get<std::string>();
  d.graph_id = j.at("graph_id").get<std::string>();
  d.title = j.at("title").get<std::string>();
  d.source_file = j.value("source_file", "");
  d.standard = parse_standard(j.at("standard").get<std::string>()).value_or(Standard::Unknown);
  d.state = parse_document_state(j.at("state").get<std::string>());
  d.pages = j.at("pages").get<std::vector<PageText>>();
  d.created_at = j.at("created_at").get<std::string>();
  d.created_by = j.at("created_by").get<std::string>();
  d.certified_at = get_optional<std::string>(j, "certified_at");
  d.certified_by = get_optional<std::string>(j, "certified_by");
  d.report = j.value("report", json(nullptr));
}

void to_json(json& j, const TripleText& t) {
  j = json{{"subject", t.subject}, {"predicate", t.predicate}, {"object", t.object}};
}

void from_json(const json& j, TripleText& t) {
  t.subject = j.at("subject").get<std::string>();
  t.predicate = j.at("predicate").get<std::string>();
  t.object = j.at("object").get<std::string>();
}

void to_json(json& j, const Judgment& jd) {
  j = json{{"id", jd.id},
           {"triple_id", jd.triple_id},
           {"reviewer", jd.reviewer},
           {"action", to_string(jd.action)},
           {"feedback", jd.feedback},
           {"created_at", jd.created_at}};
  put_optional(j, "suggested_triple", jd.suggested_triple);
  j["verdict"] = jd.verdict ? json(to_string(*jd.verdict)) : json(nullptr);
  put_optional(j, "confidence", jd.confidence);
  if (!jd.assessment.is_null()) j["assessment"] = jd.assessment;
}

void from_json(const json& j, Judgment& jd) {
  jd.id = j.at("id").get<std::string>();
  jd.triple_id = j.at("triple_id").get<std::string>();
  jd.reviewer = j.at("reviewer").get<std::string>();
  jd.action = parse_review_action(j.at("action").get<std::string>()).value_or(ReviewAction::Keep);
  jd.feedback = j.at("feedback").get<std::string>();
  jd.created_at = j.value("created_at", std::string());  // judgment events carry it in the envelope
  jd.suggested_triple = get_optional<TripleText>(j, "suggested_triple");
  if (auto v = get_optional<std::string>(j, "verdict")) jd.verdict = parse_verdict(*v);
  jd.confidence = get_optional<double>(j, "confidence");
  jd.assessment = j.value("assessment", json(nullptr));
}

void to_json(json& j, const GraphStats& s) {
  j = json{{"node_count", s.node_count},
           {"edge_count", s.edge_count},
           {"deleted_count", s.deleted_count},
           {"predicate_histogram", s.predicate_histogram}};
}

void to_json(json& j, const Subgraph& g) {
  j = json{{"nodes", g.nodes}, {"edges", g.edges}, {"truncated", g.truncated}, {"stats", g.stats}};
}

void to_json(json& j, const Path& p) { j = json{{"nodes", p.nodes}, {"edge_ids", p.edge_ids}}; }

void to_json(json& j, const EdgeRow& r) {
  j = json{{"triple_id", r.triple_id},
           {"subject", r.subject},
           {"predicate", r.predicate},
           {"object", r.object},
           {"document_id", r.document_id},
           {"status", to_string(r.status)},
           {"deleted", r.deleted}};
  put_optional(j, "page", r.page);
}

}  // namespace certkg::store
