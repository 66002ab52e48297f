#include "certkg/governance/verifier.hpp"

#include "certkg/error.hpp"
#include "certkg/strict_json.hpp"

namespace certkg::governance {

using nlohmann::json;

json to_json(const VerifierAssessment& a) {
  return json{{"verdict", to_string(a.verdict)},
              {"confidence", a.confidence},
              {"reasoning", a.reasoning},
              {"evidence_quote", a.evidence_quote},
              {"issues", a.issues},
              {"suggested_triplet",
               {{"subject", a.suggested_triplet.subject},
                {"predicate", a.suggested_triplet.predicate},
                {"object", a.suggested_triplet.object}}},
              {"expert_action_hint", to_string(a.expert_action_hint)}};
}

VerifierAssessment parse_verifier_output(std::string_view raw) {
  const StrictReader r(raw);
  const json& root = r.root();
  r.exact_keys(root,
               {"verdict", "confidence", "reasoning", "evidence_quote", "issues", "suggested_triplet",
                "expert_action_hint"},
               "assessment");
  VerifierAssessment a;
  a.verdict = *store::parse_verdict(
      r.one_of(root, "verdict", {"CORRECT", "NEEDS_IMPROVEMENT", "INCORRECT"}, "assessment"));
  a.confidence = r.number_in(root, "confidence", 0.0, 1.0, "assessment");
  a.reasoning = r.string(root, "reasoning", "assessment");
  a.evidence_quote = r.string(root, "evidence_quote", "assessment");
  for (const json& issue : r.array(root, "issues", "assessment")) {
    a.issues.push_back(r.element_string(issue, "assessment.issues[]"));
  }
  const json& suggested = r.object(root, "suggested_triplet", "assessment");
  r.exact_keys(suggested, {"subject", "predicate", "object"}, "assessment.suggested_triplet");
  a.suggested_triplet.subject = r.string(suggested, "subject", "assessment.suggested_triplet");
  a.suggested_triplet.predicate = r.string(suggested, "predicate", "assessment.suggested_triplet");
  a.suggested_triplet.object = r.string(suggested, "object", "assessment.suggested_triplet");
  a.expert_action_hint = *store::parse_review_action(
      r.one_of(root, "expert_action_hint", {"keep", "edit", "delete"}, "assessment"));
  return a;
}

ingest::LlmRequest verifier_request(const store::StoreState& state, const std::string& triple_id,
                                    const ingest::PromptRegistry& prompts, const std::string& model_id) {
  const store::TripleRecord& t = state.triple(triple_id);
  const store::DocumentRecord& doc = state.document(t.provenance.document_id);
  const std::string& evidence = t.provenance.evidence_sentence.value_or("");
  const std::map<std::string, std::string> values{
      {"doc_name", doc.title},
      {"source_file", doc.source_file},
      {"source_page", t.provenance.page ? std::to_string(*t.provenance.page) : std::string()},
      {"subject", t.subject},
      {"predicate", t.predicate},
      {"object", t.object},
      {"evidence", evidence.empty() ? std::string(kNoEvidenceText) : evidence},
  };
  return ingest::LlmRequest{model_id, prompts.get("evaluation.system"),
                            ingest::render(prompts.get("evaluation.user"), values), 0.0};
}

VerifierRun run_verifier(store::GraphStore& store, const Actor& actor, const std::string& triple_id,
                         ingest::LlmClient& llm, const ingest::PromptRegistry& prompts,
                         const std::string& model_id, const ingest::RetryPolicy& retry) {
  require(actor, Action::RunVerifier);
  const ingest::LlmRequest request =
      store.read([&](const store::StoreState& s) { return verifier_request(s, triple_id, prompts, model_id); });
  const ingest::LlmResponse response = ingest::complete_with_retry(llm, request, retry);
  VerifierAssessment assessment = parse_verifier_output(response.text);

  store::Judgment j;
  j.triple_id = triple_id;
  j.reviewer = std::string(store::kVerifierReviewer);
  j.action = assessment.expert_action_hint;
  if (assessment.expert_action_hint == store::ReviewAction::Edit) j.suggested_triple = assessment.suggested_triplet;
  j.feedback = assessment.reasoning;
  j.verdict = assessment.verdict;
  j.confidence = assessment.confidence;
  j.assessment = to_json(assessment);
  store::Judgment recorded = store.write([&](store::GraphStore::Writer& w) {
    w.state().triple(triple_id);
    return w.record_judgment(std::move(j), actor.id);
  });
  return VerifierRun{std::move(assessment), std::move(recorded)};
}

}  // namespace certkg::governance
