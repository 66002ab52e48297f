#include "certkg/governance/review.hpp"

#include "certkg/error.hpp"

#include <set>

namespace certkg::governance {

using nlohmann::json;
using store::DocumentState;
using store::ReviewAction;
using store::TripleStatus;

namespace {

void ensure_reviewable(const store::DocumentRecord& doc) {
  if (doc.state == DocumentState::Certified) {
    throw Error(ErrorCode::DocumentCertified, "document " + doc.id + " is certified");
  }
  if (doc.state != DocumentState::Draft && doc.state != DocumentState::UnderReview) {
    throw Error(ErrorCode::WrongState, "document " + doc.id + " is " + std::string(to_string(doc.state)));
  }
}

std::set<std::string> distinct_actions(const Aggregate& a) {
  std::set<std::string> out;
  for (const auto& [action, count] : a.human_actions) {
    if (count > 0) out.insert(action);
  }
  return out;
}

}  // namespace

store::Judgment submit_judgment(store::GraphStore& store, const Actor& actor, const JudgmentInput& input) {
  require(actor, Action::Judge);
  if (actor.id == store::kVerifierReviewer) {
    throw Error(ErrorCode::InvalidArgument, "reviewer name is reserved for the verifier");
  }
  if (input.action == ReviewAction::Edit && !input.suggested_triple) {
    throw Error(ErrorCode::InvalidArgument, "edit judgments require a suggested triple");
  }
  if (input.confidence && (*input.confidence < 0.0 || *input.confidence > 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "confidence must be within [0, 1]");
  }
  if (input.apply && input.action != ReviewAction::Delete) {
    throw Error(ErrorCode::InvalidArgument, "apply is only meaningful for delete judgments");
  }
  return store.write([&](store::GraphStore::Writer& w) {
    const store::TripleRecord& t = w.state().triple(input.triple_id);
    const store::DocumentRecord& doc = w.state().document(t.provenance.document_id);
    ensure_reviewable(doc);
    if (t.deleted) throw Error(ErrorCode::AlreadyDeleted, "triple " + t.id + " is deleted");

    store::Judgment j;
    j.triple_id = input.triple_id;
    j.reviewer = actor.id;
    j.action = input.action;
    j.suggested_triple = input.suggested_triple;
    j.feedback = input.feedback;
    j.verdict = input.verdict;
    j.confidence = input.confidence;
    store::Judgment recorded = w.record_judgment(std::move(j), actor.id);
    if (doc.state == DocumentState::Draft) {
      w.set_document_state(doc.id, DocumentState::UnderReview, actor.id);
    }
    if (input.apply) w.soft_delete_triple(t.graph_id, t.id, actor.id, "judgment " + recorded.id);
    return recorded;
  });
}

Aggregate aggregate_judgments(const store::StoreState& state, const std::string& triple_id) {
  const store::TripleRecord& t = state.triple(triple_id);
  Aggregate a;
  a.triple_id = triple_id;
  a.meta = t.meta;
  for (const store::Judgment* j : state.judgments_for(triple_id)) {
    if (j->is_machine()) {
      a.verifier_verdict = j->verdict;
      continue;
    }
    ++a.human_actions[std::string(to_string(j->action))];
    ++a.human_judgments;
  }
  a.conflict = distinct_actions(a).size() >= 2;
  return a;
}

Aggregate aggregate_judgments(const store::GraphStore& store, const std::string& triple_id) {
  return store.read([&](const store::StoreState& s) { return aggregate_judgments(s, triple_id); });
}

json to_json(const Aggregate& a) {
  json j{{"triple_id", a.triple_id},
         {"human_actions", a.human_actions},
         {"human_judgments", a.human_judgments},
         {"verifier_verdict", nullptr},
         {"conflict", a.conflict},
         {"meta_verdict", nullptr}};
  if (a.verifier_verdict) j["verifier_verdict"] = to_string(*a.verifier_verdict);
  if (a.meta) j["meta_verdict"] = *a.meta;
  return j;
}

store::TripleRecord meta_finalize_triple(store::GraphStore& store, const Actor& actor,
                                         const std::string& triple_id, const std::string& decision,
                                         const std::string& note) {
  require(actor, Action::Finalize);
  return store.write([&](store::GraphStore::Writer& w) {
    const store::TripleRecord& t = w.state().triple(triple_id);
    const store::DocumentRecord& doc = w.state().document(t.provenance.document_id);
    if (doc.state == DocumentState::Certified) {
      throw Error(ErrorCode::DocumentCertified, "document " + doc.id + " is certified");
    }
    if (doc.state != DocumentState::UnderReview) {
      throw Error(ErrorCode::WrongState, "finalization requires the document to be under review");
    }
    if (t.status == TripleStatus::Certified) {
      throw Error(ErrorCode::CertifiedImmutable, "triple " + t.id + " is already certified");
    }
    if (t.status == TripleStatus::Rejected) {
      throw Error(ErrorCode::WrongState, "triple " + t.id + " is already rejected");
    }
    if (decision == "certify" && t.deleted) {
      throw Error(ErrorCode::WrongState, "restore triple " + t.id + " before certifying it");
    }
    return w.finalize_triple(triple_id, decision, note, actor.id);
  });
}

ReadinessReport readiness(const store::StoreState& state, const std::string& document_id,
                          const GovernanceConfig& config) {
  const store::DocumentRecord& doc = state.document(document_id);
  ReadinessReport r;
  r.document_id = doc.id;
  r.state = doc.state;
  r.coverage_threshold = config.coverage_threshold;
  for (const store::TripleRecord* t : state.document_triples(document_id)) {
    ++r.total_inserted;
    if (t->status == TripleStatus::Rejected || t->deleted) {
      ++r.rejected_triples;
      if (t->meta) ++r.finalized_triples;
      continue;
    }
    if (t->status == TripleStatus::Certified) ++r.certified_triples;
    if (t->meta) ++r.finalized_triples;
    ++r.total_triples;
    const Aggregate a = aggregate_judgments(state, t->id);
    if (a.human_judgments >= config.min_judgments && a.human_judgments > 0) {
      ++r.reviewed_triples;
    } else {
      r.unreviewed_ids.push_back(t->id);
    }
    if (a.conflict && !a.meta) {
      ++r.unresolved_conflicts;
      r.conflict_ids.push_back(t->id);
    }
    const auto actions = distinct_actions(a);
    if (a.verifier_verdict == store::Verdict::Incorrect && actions == std::set<std::string>{"keep"}) {
      r.high_risk_ids.push_back(t->id);
    }
  }
  // An empty document is vacuously covered.
  r.coverage = r.total_triples == 0 ? 1.0
                                    : static_cast<double>(r.reviewed_triples) / static_cast<double>(r.total_triples);
  r.retention = r.total_inserted == 0
                    ? 0.0
                    : static_cast<double>(r.certified_triples) / static_cast<double>(r.total_inserted);
  r.certifiable = r.coverage >= config.coverage_threshold && r.unresolved_conflicts == 0;
  return r;
}

ReadinessReport readiness(const store::GraphStore& store, const std::string& document_id,
                          const GovernanceConfig& config) {
  return store.read([&](const store::StoreState& s) { return readiness(s, document_id, config); });
}

json to_json(const ReadinessReport& r) {
  return json{{"document_id", r.document_id},
              {"state", to_string(r.state)},
              {"total_triples", r.total_triples},
              {"reviewed_triples", r.reviewed_triples},
              {"coverage", r.coverage},
              {"coverage_threshold", r.coverage_threshold},
              {"unresolved_conflicts", r.unresolved_conflicts},
              {"finalized_triples", r.finalized_triples},
              {"certifiable", r.certifiable},
              {"total_inserted", r.total_inserted},
              {"certified_triples", r.certified_triples},
              {"rejected_triples", r.rejected_triples},
              {"retention", r.retention},
              {"conflict_ids", r.conflict_ids},
              {"unreviewed_ids", r.unreviewed_ids},
              {"high_risk_ids", r.high_risk_ids}};
}

json to_json(const CertificationRecord& c) {
  return json{{"document_id", c.document_id},
              {"certified_at", c.certified_at},
              {"certified_by", c.certified_by},
              {"triple_count", c.triple_count}};
}

CertificationRecord certify_document(store::GraphStore& store, const Actor& actor,
                                     const std::string& document_id, const GovernanceConfig& config) {
  require(actor, Action::Certify);
  return store.write([&](store::GraphStore::Writer& w) {
    const store::DocumentRecord& doc = w.state().document(document_id);
    if (doc.state == DocumentState::Certified) {
      throw Error(ErrorCode::DocumentCertified, "document " + doc.id + " is already certified");
    }
    if (doc.state == DocumentState::Ingesting) {
      throw Error(ErrorCode::WrongState, "document " + doc.id + " is still ingesting");
    }
    const ReadinessReport report = readiness(w.state(), document_id, config);
    if (!report.certifiable) {
      throw Error(ErrorCode::NotReady, "document " + doc.id + " is not ready for certification", to_json(report));
    }
    std::vector<std::string> promote;
    std::vector<std::string> reject;
    for (const store::TripleRecord* t : w.state().document_triples(document_id)) {
      if (t->status != TripleStatus::Draft) continue;
      if (t->deleted) {
        reject.push_back(t->id);
        continue;
      }
      const auto actions = distinct_actions(aggregate_judgments(w.state(), t->id));
      if (actions.size() != 1) continue;  // unreviewed stays Draft; conflicts were finalized
      if (*actions.begin() == "delete") {
        reject.push_back(t->id);
      } else {
        promote.push_back(t->id);
      }
    }
    w.certify_document(document_id, promote, reject, actor.id);
    const store::DocumentRecord& after = w.state().document(document_id);
    std::size_t count = 0;
    for (const store::TripleRecord* t : w.state().document_triples(document_id)) {
      if (t->status == TripleStatus::Certified && !t->deleted) ++count;
    }
    return CertificationRecord{document_id, after.certified_at.value_or(""), after.certified_by.value_or(""), count};
  });
}

}  // namespace certkg::governance
