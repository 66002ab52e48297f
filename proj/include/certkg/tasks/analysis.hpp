#pragma once

#include "certkg/ingest/llm.hpp"
#include "certkg/ingest/prompts.hpp"
#include "certkg/store/graph_store.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace certkg::tasks {

struct HealthItem {
  std::string title, status, detail;
};
struct RiskItem {
  std::string title, severity, detail;
};
struct GapItem {
  std::string topic, reason, priority;
};
struct QuestionableTriple {
  std::string subject, predicate, object, issue;
};
struct ActionItem {
  std::string title, impact, effort, confidence, why;
};

struct AnalysisReport {
  std::string overview;
  std::vector<HealthItem> graph_health;
  std::vector<RiskItem> top_risks;
  std::vector<GapItem> coverage_gaps;
  std::vector<QuestionableTriple> questionable_triples;
  std::vector<ActionItem> recommended_actions;
  std::string confidence_summary;
};
nlohmann::json to_json(const AnalysisReport& r);

// Exactly the seven top-level fields with exact element shapes and enums;
// SchemaViolation (raw payload preserved) otherwise.
AnalysisReport parse_analysis_output(std::string_view raw);

const std::vector<std::string>& analysis_presets();

struct AnalysisRequest {
  std::string graph_id;
  std::string preset = "executive";
  int depth = 1;
  std::string user_prompt;
  // Also enabled when the user prompt mentions anomalies or outliers.
  bool anomaly_detection = false;
};

// Depth 1 carries statistics, 2 adds schema diagnostics, 3 adds coverage gaps
// and duplicate candidates.
nlohmann::json analysis_context(const store::StoreState& state, const AnalysisRequest& request);
ingest::LlmRequest analysis_request(const store::StoreState& state, const AnalysisRequest& request,
                                    const ingest::PromptRegistry& prompts, const std::string& model_id);

struct AnalysisRun {
  AnalysisReport report;
  std::string payload_digest;  // sha256 of the rendered user message
  std::size_t payload_bytes = 0;
};
nlohmann::json to_json(const AnalysisRun& r);

AnalysisRun run_analysis(const store::GraphStore& store, const AnalysisRequest& request, ingest::LlmClient& llm,
                         const ingest::PromptRegistry& prompts, const std::string& model_id,
                         const ingest::RetryPolicy& retry = {});

}  // namespace certkg::tasks
