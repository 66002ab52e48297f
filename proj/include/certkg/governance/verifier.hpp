#pragma once

#include "certkg/governance/roles.hpp"
#include "certkg/ingest/llm.hpp"
#include "certkg/ingest/prompts.hpp"
#include "certkg/store/graph_store.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace certkg::governance {

inline constexpr std::string_view kNoEvidenceText = "[No source sentence stored]";

struct VerifierAssessment {
  store::Verdict verdict = store::Verdict::NeedsImprovement;
  double confidence = 0.0;
  std::string reasoning;
  std::string evidence_quote;
  std::vector<std::string> issues;
  store::TripleText suggested_triplet;
  store::ReviewAction expert_action_hint = store::ReviewAction::Keep;
};

nlohmann::json to_json(const VerifierAssessment& a);

// Accepts exactly the seven-field object and nothing else: no fences, no
// extra or missing keys, no out-of-range confidence. SchemaViolation otherwise.
VerifierAssessment parse_verifier_output(std::string_view raw);

ingest::LlmRequest verifier_request(const store::StoreState& state, const std::string& triple_id,
                                    const ingest::PromptRegistry& prompts, const std::string& model_id);

struct VerifierRun {
  VerifierAssessment assessment;
  store::Judgment judgment;
};

// The model call happens outside the write lock; the judgment is recorded
// under reviewer "llm-verifier" and never counts toward human coverage.
VerifierRun run_verifier(store::GraphStore& store, const Actor& actor, const std::string& triple_id,
                         ingest::LlmClient& llm, const ingest::PromptRegistry& prompts,
                         const std::string& model_id, const ingest::RetryPolicy& retry = {});

}  // namespace certkg::governance
