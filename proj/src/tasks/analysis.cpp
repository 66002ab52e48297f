#include "certkg/tasks/analysis.hpp"

#include "certkg/digest.hpp"
#include "certkg/error.hpp"
#include "certkg/store/traversal.hpp"
#include "certkg/strict_json.hpp"
#include "certkg/tasks/tasks.hpp"
#include "certkg/text.hpp"

#include <algorithm>

namespace certkg::tasks {

using nlohmann::json;

json to_json(const AnalysisReport& r) {
  json health = json::array();
  for (const auto& h : r.graph_health) health.push_back({{"title", h.title}, {"status", h.status}, {"detail", h.detail}});
  json risks = json::array();
  for (const auto& k : r.top_risks) risks.push_back({{"title", k.title}, {"severity", k.severity}, {"detail", k.detail}});
  json gaps = json::array();
  for (const auto& g : r.coverage_gaps) gaps.push_back({{"topic", g.topic}, {"reason", g.reason}, {"priority", g.priority}});
  json questionable = json::array();
  for (const auto& q : r.questionable_triples) {
    questionable.push_back({{"subject", q.subject}, {"predicate", q.predicate}, {"object", q.object}, {"issue", q.issue}});
  }
  json actions = json::array();
  for (const auto& a : r.recommended_actions) {
    actions.push_back({{"title", a.title},
                       {"impact", a.impact},
                       {"effort", a.effort},
                       {"confidence", a.confidence},
                       {"why", a.why}});
  }
  return json{{"overview", r.overview},
              {"graph_health", health},
              {"top_risks", risks},
              {"coverage_gaps", gaps},
              {"questionable_triples", questionable},
              {"recommended_actions", actions},
              {"confidence_summary", r.confidence_summary}};
}

AnalysisReport parse_analysis_output(std::string_view raw) {
  const StrictReader r(raw);
  const json& root = r.root();
  r.exact_keys(root,
               {"overview", "graph_health", "top_risks", "coverage_gaps", "questionable_triples",
                "recommended_actions", "confidence_summary"},
               "analysis");
  const std::set<std::string> level{"high", "medium", "low"};
  const std::set<std::string> hml{"H", "M", "L"};
  AnalysisReport a;
  a.overview = r.string(root, "overview", "analysis");
  for (const json& v : r.array(root, "graph_health", "analysis")) {
    const json& o = r.element_object(v, "graph_health[]");
    r.exact_keys(o, {"title", "status", "detail"}, "graph_health[]");
    a.graph_health.push_back({r.string(o, "title", "graph_health[]"),
                              r.one_of(o, "status", {"good", "watch", "risk"}, "graph_health[]"),
                              r.string(o, "detail", "graph_health[]")});
  }
  for (const json& v : r.array(root, "top_risks", "analysis")) {
    const json& o = r.element_object(v, "top_risks[]");
    r.exact_keys(o, {"title", "severity", "detail"}, "top_risks[]");
    a.top_risks.push_back({r.string(o, "title", "top_risks[]"), r.one_of(o, "severity", level, "top_risks[]"),
                           r.string(o, "detail", "top_risks[]")});
  }
  for (const json& v : r.array(root, "coverage_gaps", "analysis")) {
    const json& o = r.element_object(v, "coverage_gaps[]");
    r.exact_keys(o, {"topic", "reason", "priority"}, "coverage_gaps[]");
    a.coverage_gaps.push_back({r.string(o, "topic", "coverage_gaps[]"), r.string(o, "reason", "coverage_gaps[]"),
                               r.one_of(o, "priority", level, "coverage_gaps[]")});
  }
  for (const json& v : r.array(root, "questionable_triples", "analysis")) {
    const json& o = r.element_object(v, "questionable_triples[]");
    r.exact_keys(o, {"subject", "predicate", "object", "issue"}, "questionable_triples[]");
    a.questionable_triples.push_back(
        {r.string(o, "subject", "questionable_triples[]"), r.string(o, "predicate", "questionable_triples[]"),
         r.string(o, "object", "questionable_triples[]"), r.string(o, "issue", "questionable_triples[]")});
  }
  for (const json& v : r.array(root, "recommended_actions", "analysis")) {
    const json& o = r.element_object(v, "recommended_actions[]");
    r.exact_keys(o, {"title", "impact", "effort", "confidence", "why"}, "recommended_actions[]");
    a.recommended_actions.push_back(
        {r.string(o, "title", "recommended_actions[]"), r.one_of(o, "impact", hml, "recommended_actions[]"),
         r.one_of(o, "effort", hml, "recommended_actions[]"), r.one_of(o, "confidence", hml, "recommended_actions[]"),
         r.string(o, "why", "recommended_actions[]")});
  }
  a.confidence_summary = r.string(root, "confidence_summary", "analysis");
  return a;
}

const std::vector<std::string>& analysis_presets() {
  static const std::vector<std::string> presets{"executive", "quality_audit", "compliance", "ontology_health"};
  return presets;
}

namespace {

void validate(const AnalysisRequest& request) {
  const auto& presets = analysis_presets();
  if (std::find(presets.begin(), presets.end(), request.preset) == presets.end()) {
    throw Error(ErrorCode::InvalidArgument, "unknown analysis preset: " + request.preset);
  }
  if (request.depth < 1 || request.depth > 3) throw Error(ErrorCode::InvalidArgument, "depth must be 1, 2, or 3");
}

bool wants_anomalies(const AnalysisRequest& request) {
  return request.anomaly_detection || text::icontains(request.user_prompt, "anomal") ||
         text::icontains(request.user_prompt, "outlier");
}

}  // namespace

json analysis_context(const store::StoreState& state, const AnalysisRequest& request) {
  validate(request);
  const store::GraphState& g = state.graph(request.graph_id);
  json ctx{{"graph_id", request.graph_id}, {"depth", request.depth}, {"stats", store::compute_stats(g)}};
  if (request.depth >= 2) ctx["diagnostics"] = to_json(schema_diagnostics(state, request.graph_id));
  if (request.depth >= 3) {
    ctx["coverage_gaps"] = to_json(coverage_gaps(state, request.graph_id, checklist_for_graph(state, request.graph_id)));
    ctx["duplicates"] = to_json(detect_duplicates(state, request.graph_id));
  }
  return ctx;
}

ingest::LlmRequest analysis_request(const store::StoreState& state, const AnalysisRequest& request,
                                    const ingest::PromptRegistry& prompts, const std::string& model_id) {
  const json ctx = analysis_context(state, request);
  std::string mode = prompts.get("analysis.modes." + std::to_string(request.depth));
  if (wants_anomalies(request)) mode += " " + prompts.get("analysis.anomaly_instruction");
  const std::string system = ingest::render(prompts.get("analysis.system"),
                                            {{"mode_instruction", mode},
                                             {"user_prompt", text::trim(request.user_prompt)},
                                             {"preset_prompt", text::trim(prompts.get("analysis.presets." + request.preset))}});
  const std::string user = ingest::render(prompts.get("analysis.user"), {{"context", ctx.dump(2)}});
  return ingest::LlmRequest{model_id, system, user, 0.0};
}

json to_json(const AnalysisRun& r) {
  return json{{"report", to_json(r.report)}, {"payload_digest", r.payload_digest}, {"payload_bytes", r.payload_bytes}};
}

AnalysisRun run_analysis(const store::GraphStore& store, const AnalysisRequest& request, ingest::LlmClient& llm,
                         const ingest::PromptRegistry& prompts, const std::string& model_id,
                         const ingest::RetryPolicy& retry) {
  const ingest::LlmRequest req =
      store.read([&](const store::StoreState& s) { return analysis_request(s, request, prompts, model_id); });
  const ingest::LlmResponse response = ingest::complete_with_retry(llm, req, retry);
  AnalysisRun run;
  run.report = parse_analysis_output(response.text);
  run.payload_digest = sha256_hex(req.user);
  run.payload_bytes = req.user.size();
  return run;
}

}  // namespace certkg::tasks
