#include "certkg/service/api.hpp"
#include "certkg/service/config.hpp"
#include "certkg/service/export.hpp"
#include "certkg/service/server.hpp"
#include "service_harness.hpp"

#include <catch_amalgamated.hpp>
#include <httplib.h>

#include <condition_variable>
#include <cstdlib>
#include <random>
#include <set>
#include <thread>

using namespace certkg;
using namespace certkg::testing;
using governance::Role;
using nlohmann::json;

namespace {

service::EnvLookup env_with(std::map<std::string, std::string> vars) {
  return [vars](const std::string& k) -> std::optional<std::string> {
    auto it = vars.find(k);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

ErrorCode config_error(const std::string& yaml, const service::EnvLookup& env = env_with({})) {
  try {
    service::parse_config(yaml, "/base", env);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;  // sentinel: no error raised
}

json body_of(const service::ApiResponse& r) { return json::parse(r.body); }

// Blocks the first model call until released, so a test can observe a
// document mid-ingestion.
class GatedLlm : public ingest::LlmClient {
 public:
  explicit GatedLlm(std::shared_ptr<ingest::LlmClient> inner) : inner_(std::move(inner)) {}
  ingest::LlmResponse complete(const ingest::LlmRequest& r) override {
    {
      std::unique_lock lock(m_);
      cv_.wait(lock, [&] { return open_; });
    }
    return inner_->complete(r);
  }
  void open() {
    std::lock_guard lock(m_);
    open_ = true;
    cv_.notify_all();
  }

 private:
  std::shared_ptr<ingest::LlmClient> inner_;
  std::mutex m_;
  std::condition_variable cv_;
  bool open_ = false;
};

}  // namespace

TEST_CASE("service config: one llm mode, keys from the environment, relative paths") {
  const std::string replay = "llm:\n  mode: replay\n  replay_fixture: fx/replay.jsonl\ndata_dir: data\n";
  auto c = service::parse_config(replay, "/base", env_with({}));
  CHECK(c.llm.mode == service::LlmMode::Replay);
  CHECK(c.llm.replay_fixture == std::filesystem::path("/base/fx/replay.jsonl"));
  CHECK(c.data_dir == std::filesystem::path("/base/data"));
  CHECK(c.governance.coverage_threshold == 1.0);
  CHECK(c.edge_cap == 500);

  const std::string live =
      "llm:\n  mode: live\n  endpoint: https://x/v1\n  api_key_env: KEY\n  model_id: m\n"
      "thresholds:\n  coverage_threshold: 0.8\n  edge_cap: 50\n  session_ttl_hours: 2\n";
  CHECK(config_error(live) == ErrorCode::InvalidConfig);  // key variable missing
  auto lc = service::parse_config(live, "/base", env_with({{"KEY", "secret"}}));
  CHECK(lc.llm.mode == service::LlmMode::Live);
  CHECK(lc.governance.coverage_threshold == 0.8);
  CHECK(lc.edge_cap == 50);
  CHECK(lc.session_ttl == std::chrono::hours(2));

  // Both modes configured at once, unknown keys, and out-of-range values.
  CHECK(config_error("llm:\n  mode: replay\n  replay_fixture: a\n  endpoint: https://x\n") == ErrorCode::InvalidConfig);
  CHECK(config_error("llm:\n  mode: live\n  endpoint: e\n  api_key_env: K\n  replay_fixture: a\n",
                     env_with({{"K", "v"}})) == ErrorCode::InvalidConfig);
  CHECK(config_error("llm:\n  mode: offline\n") == ErrorCode::InvalidConfig);
  CHECK(config_error("llm:\n  mode: replay\n") == ErrorCode::InvalidConfig);
  CHECK(config_error(replay + "surprise: 1\n") == ErrorCode::InvalidConfig);
  CHECK(config_error(replay + "thresholds:\n  coverage_threshold: 1.5\n") == ErrorCode::InvalidConfig);
  CHECK(config_error(replay + "ingest:\n  chunk_size: 100\n  overlap: 100\n") == ErrorCode::InvalidConfig);
  CHECK(config_error(replay + "listen:\n  port: seventy\n") == ErrorCode::InvalidConfig);
  CHECK(config_error("a: [unclosed\n") == ErrorCode::InvalidConfig);

  // Live mode refuses to build a client once the variable disappears.
  CHECK_THROWS_MATCHES(service::make_llm_client(lc, nullptr, env_with({})), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == ErrorCode::InvalidConfig; }));

  // The shipped sample configs parse.
  auto shipped = service::load_config(std::filesystem::path(CERTKG_FIXTURES_DIR) / "../../config/replay.yaml");
  CHECK(shipped.llm.mode == service::LlmMode::Replay);
  CHECK(std::filesystem::exists(shipped.llm.replay_fixture));
  auto example = service::load_config(std::filesystem::path(CERTKG_FIXTURES_DIR) / "../../config/live.example.yaml",
                                      env_with({{"CERTKG_LLM_API_KEY", "k"}}));
  CHECK(example.llm.mode == service::LlmMode::Live);
}

TEST_CASE("every error code maps to one status and a distinct machine code") {
  std::set<std::string> names;
  const std::set<int> statuses{400, 401, 403, 404, 409, 500, 502};
  for (int i = 0; i <= static_cast<int>(ErrorCode::Io); ++i) {
    const auto code = static_cast<ErrorCode>(i);
    const std::string name(error_code_name(code));
    CHECK(names.insert(name).second);
    CHECK(statuses.contains(service::http_status(code)));
    auto r = service::error_response(Error(code, "m", {{"k", 1}}));
    auto b = body_of(r);
    CHECK(b.at("code") == name);
    CHECK(b.at("message") == "m");
    CHECK(b.at("detail") == json{{"k", 1}});
    CHECK(r.status == service::http_status(code));
  }
  CHECK(service::http_status(ErrorCode::Unauthorized) == 403);
  CHECK(service::http_status(ErrorCode::NotReady) == 409);
  CHECK(service::http_status(ErrorCode::CertifiedImmutable) == 409);
  CHECK(service::http_status(ErrorCode::Unauthenticated) == 401);
}

TEST_CASE("csv export quotes by the RFC and round-trips arbitrary fields") {
  CHECK(service::csv_field("plain") == "plain");
  CHECK(service::csv_field("a,b") == "\"a,b\"");
  CHECK(service::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(service::csv_field("two\nlines") == "\"two\nlines\"");
  CHECK(service::csv_field("cr\rhere") == "\"cr\rhere\"");
  CHECK(service::csv_field("") == "");

  store::EdgeRow r{"t1", "Acme, Inc.", "says", "\"quoted\"", "d1", 3, store::TripleStatus::Certified, false};
  const auto csv = service::edges_to_csv({r});
  CHECK(csv == "triple_id,subject,predicate,object,document_id,page,status\r\n"
               "t1,\"Acme, Inc.\",says,\"\"\"quoted\"\"\",d1,3,Certified\r\n");

  std::mt19937 rng(7);
  const std::vector<std::string> alphabet{"a", "Z", "9", " ", ",", "\"", "\n", "\r", "é", "水", "🙂", "'", ";"};
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<store::EdgeRow> rows;
    const int n = static_cast<int>(rng() % 5);
    auto field = [&] {
      std::string s;
      const int len = static_cast<int>(rng() % 8);
      for (int i = 0; i < len; ++i) s += alphabet[rng() % alphabet.size()];
      return s;
    };
    for (int i = 0; i < n; ++i) {
      store::EdgeRow e;
      e.triple_id = "t" + std::to_string(i);
      e.subject = field();
      e.predicate = field();
      e.object = field();
      e.document_id = field();
      if (rng() % 2) e.page = static_cast<int>(rng() % 100);
      rows.push_back(e);
    }
    const auto parsed = service::parse_csv(service::edges_to_csv(rows));
    REQUIRE(parsed.size() == rows.size() + 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      REQUIRE(parsed[i + 1].size() == 7);
      CHECK(parsed[i + 1][1] == rows[i].subject);
      CHECK(parsed[i + 1][2] == rows[i].predicate);
      CHECK(parsed[i + 1][3] == rows[i].object);
      CHECK(parsed[i + 1][4] == rows[i].document_id);
      CHECK(parsed[i + 1][5] == (rows[i].page ? std::to_string(*rows[i].page) : ""));
    }
  }
}

TEST_CASE("permission matrix: every role against every endpoint over the router") {
  ServiceHarness h;
  auto outcome = run_permission_matrix(h);
  for (const auto& f : outcome.failures) UNSCOPED_INFO(f);
  CHECK(outcome.failures.empty());
  CHECK(outcome.pairs == documented_matrix().size() * 4);
  CHECK(outcome.guest_mutations > 0);
  CHECK(outcome.guest_mutations_denied == outcome.guest_mutations);

  // Guest sessions are read-only end to end.
  const auto guest = h.guest();
  auto res = h.call("POST", "/triples", guest, json{{"document_id", h.document_id}, {"subject", "a"}, {"predicate", "b"}, {"object", "c"}}.dump());
  CHECK(res.status == 403);
  CHECK(body_of(res).at("code") == "unauthorized");
}

TEST_CASE("authentication: login, logout, expiry by deactivation, reset tokens") {
  ServiceHarness h(ServiceHarness::default_options(), false);
  auto bad = h.call("POST", "/auth/login", {}, json{{"username", "expert"}, {"password", "nope"}}.dump());
  CHECK(bad.status == 401);
  CHECK(body_of(bad).at("code") == "invalid_credentials");
  auto unknown = h.call("POST", "/auth/login", {}, json{{"username", "nobody"}, {"password", "x"}}.dump());
  CHECK(body_of(unknown).at("code") == "invalid_credentials");

  auto login = h.call_json("POST", "/auth/login", {}, {{"username", "expert"}, {"password", "pw-expert"}});
  CHECK(login.at("actor") == json{{"id", "expert"}, {"role", "expert"}});
  const auto token = login.at("token").get<std::string>();
  CHECK(token.size() == 64);
  CHECK(h.call("GET", "/catalog", token).status == 200);
  CHECK(h.call("POST", "/auth/logout", token).status == 200);
  CHECK(body_of(h.call("GET", "/catalog", token)).at("code") == "unauthenticated");
  CHECK(body_of(h.call("GET", "/catalog", "", {}, {}, {{"authorization", "Basic abc"}})).at("code") == "unauthenticated");

  const auto admin = h.login("admin");
  auto created = h.call_json("POST", "/admin/accounts", admin,
                             {{"username", "newbie"}, {"password", "pw-newbie"}, {"role", "expert"}}, 201);
  CHECK_FALSE(created.contains("password_hash"));
  const auto newbie_id = created.at("id").get<std::string>();
  CHECK(body_of(h.call("POST", "/admin/accounts", admin,
                       json{{"username", "newbie"}, {"password", "x"}, {"role", "expert"}}.dump()))
            .at("code") == "duplicate_username");
  CHECK(h.call("POST", "/admin/accounts", admin, json{{"username", "r"}, {"password", "x"}, {"role", "root"}}.dump())
            .status == 400);

  const auto newbie = h.login("newbie");
  auto issued = h.call_json("POST", "/admin/reset-tokens", admin, {{"account_id", newbie_id}}, 201);
  const auto reset = issued.at("token").get<std::string>();
  h.call_json("POST", "/auth/reset", {}, {{"token", reset}, {"new_password", "fresh-pw"}});
  CHECK(body_of(h.call("POST", "/auth/reset", {}, json{{"token", reset}, {"new_password", "again"}}.dump()))
            .at("code") == "invalid_token");
  CHECK(h.call("POST", "/auth/login", {}, json{{"username", "newbie"}, {"password", "fresh-pw"}}.dump()).status == 200);
  CHECK(h.call("GET", "/catalog", newbie).status == 401);  // reset ends sessions

  auto second = h.call_json("POST", "/admin/reset-tokens", admin, {{"account_id", newbie_id}}, 201);
  h.call_json("POST", "/admin/reset-tokens/revoke", admin, {{"token", second.at("token")}});
  CHECK(body_of(h.call("POST", "/auth/reset", {}, json{{"token", second.at("token")}, {"new_password", "z"}}.dump()))
            .at("code") == "invalid_token");

  const auto live = h.call_json("POST", "/auth/login", {}, {{"username", "newbie"}, {"password", "fresh-pw"}});
  h.call_json("POST", "/admin/accounts/" + newbie_id + "/deactivate", admin);
  auto after = h.call("GET", "/catalog", live.at("token").get<std::string>());
  CHECK(after.status == 401);
  CHECK(h.call("POST", "/auth/login", {}, json{{"username", "newbie"}, {"password", "fresh-pw"}}.dump()).status == 401);

  // Account administration lands in the audit chain, without secrets.
  auto audit = h.call_json("GET", "/audit", admin);
  std::set<std::string> actions;
  for (const auto& e : audit.at("entries")) actions.insert(e.at("action").get<std::string>());
  for (const char* a : {"account_created", "account_deactivated", "reset_token_issued", "reset_token_revoked", "password_reset"}) {
    CHECK(actions.contains(a));
  }
  for (const auto& line : h.svc->store().log_lines()) CHECK(line.find(reset) == std::string::npos);
}

TEST_CASE("fixture review over HTTP: 73 inserted, 24 rejected, 49 certified and exported") {
  ServiceHarness h;
  const auto meta = h.login("meta");
  auto report = h.call_json("GET", "/documents/" + h.document_id + "/report", meta);
  CHECK(report.at("state") == "Draft");
  CHECK(report.at("report").at("triples_inserted") == 73);
  CHECK(report.at("report").at("chunk_count") == 3);
  CHECK(report.at("progress").at("status") == "done");
  CHECK(report.at("progress").at("chunks_done") == 3);

  auto early = h.call("POST", "/documents/" + h.document_id + "/certify", meta);
  CHECK(early.status == 409);
  CHECK(body_of(early).at("code") == "not_ready");
  CHECK(body_of(early).at("detail").at("total_triples") == 73);

  auto certified = run_fixture_review(h);
  REQUIRE(certified.status == 200);
  CHECK(body_of(certified).at("triple_count") == 49);

  auto ready = h.call_json("GET", "/documents/" + h.document_id + "/readiness", meta);
  CHECK(ready.at("state") == "Certified");
  CHECK(ready.at("total_inserted") == 73);
  CHECK(ready.at("rejected_triples") == 24);
  CHECK(ready.at("certified_triples") == 49);
  CHECK(ready.at("retention").get<double>() == Catch::Approx(0.6712).margin(1e-4));

  auto csv = h.call("GET", "/export/edges", meta, {}, {{"graph_id", h.graph_id}, {"format", "csv"}});
  CHECK(csv.content_type.rfind("text/csv", 0) == 0);
  auto rows = service::parse_csv(csv.body);
  CHECK(rows.size() == 50);
  CHECK(rows.front() == std::vector<std::string>{"triple_id", "subject", "predicate", "object", "document_id", "page", "status"});
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][6] == "Certified");

  auto via_accept = h.call("GET", "/export/edges", h.guest(), {}, {{"graph_id", h.graph_id}}, {{"accept", "text/csv"}});
  CHECK(via_accept.body == csv.body);
  auto jsonl = h.call("GET", "/export/edges", meta, {}, {{"graph_id", h.graph_id}});
  CHECK(jsonl.content_type == "application/x-ndjson");
  CHECK(std::count(jsonl.body.begin(), jsonl.body.end(), '\n') == 49);
  auto with_deleted = h.call("GET", "/export/edges", meta, {}, {{"graph_id", h.graph_id}, {"include_deleted", "true"}});
  CHECK(std::count(with_deleted.body.begin(), with_deleted.body.end(), '\n') == 73);
  CHECK(h.call("GET", "/export/edges", h.guest(), {}, {{"graph_id", h.graph_id}, {"include_deleted", "true"}}).status == 403);

  // Certified content is frozen.
  const auto expert = h.login("expert");
  auto patch = h.call("PATCH", "/triples/" + rows[1][0], expert, json{{"object", "changed"}}.dump());
  CHECK(patch.status == 409);
  CHECK(body_of(patch).at("code") == "certified_immutable");
  auto again = h.call("POST", "/documents/" + h.document_id + "/certify", meta);
  CHECK(body_of(again).at("code") == "document_certified");
}

TEST_CASE("certification gate: a keep/delete conflict blocks until meta finalization") {
  ServiceHarness h;
  const auto expert = h.login("expert");
  const auto expert2 = h.login("expert2");
  const auto meta = h.login("meta");
  auto view = h.call("GET", "/documents/" + h.document_id + "/graph", expert, {}, {{"cap", "1000"}});
  const auto edges = body_of(view).at("edges");
  REQUIRE(edges.size() == 73);
  for (const auto& e : edges) h.call_json("POST", "/triples/" + e.at("id").get<std::string>() + "/judgments", expert, {{"action", "keep"}}, 201);
  const auto contested = edges.at(0).at("id").get<std::string>();
  h.call_json("POST", "/triples/" + contested + "/judgments", expert2, {{"action", "delete"}}, 201);

  auto blocked = h.call("POST", "/documents/" + h.document_id + "/certify", meta);
  REQUIRE(blocked.status == 409);
  const auto detail = body_of(blocked).at("detail");
  CHECK(body_of(blocked).at("code") == "not_ready");
  CHECK(detail.at("unresolved_conflicts") == 1);
  CHECK(detail.at("conflict_ids") == json::array({contested}));
  CHECK(detail.at("certifiable") == false);

  auto judgments = h.call_json("GET", "/triples/" + contested + "/judgments", h.guest());
  CHECK(judgments.at("aggregate").at("conflict") == true);
  CHECK(judgments.at("judgments").size() == 2);

  CHECK(h.call("POST", "/triples/" + contested + "/finalize", expert, json{{"decision", "certify"}}.dump()).status == 403);
  h.call_json("POST", "/triples/" + contested + "/finalize", meta, {{"decision", "certify"}, {"note", "evidence supports it"}});
  auto ok = h.call("POST", "/documents/" + h.document_id + "/certify", meta);
  REQUIRE(ok.status == 200);
  CHECK(body_of(ok).at("triple_count") == 73);

  auto del = h.call("DELETE", "/triples/" + contested, expert);
  CHECK(del.status == 409);
  CHECK(body_of(del).at("code") == "certified_immutable");
  auto judge = h.call("POST", "/triples/" + contested + "/judgments", expert, json{{"action", "keep"}}.dump());
  CHECK(judge.status == 409);
}

TEST_CASE("triple CRUD, evidence and soft-delete reversibility over HTTP") {
  ServiceHarness h;
  const auto expert = h.login("expert");
  auto created = h.call_json("POST", "/triples", expert,
                             {{"document_id", h.document_id}, {"subject", "Northwind Energy"}, {"predicate", "employs"},
                              {"object", "4,200 people"}, {"page", 1}, {"evidence_sentence", "It employs 4,200 people."}},
                             201);
  const auto tid = created.at("triple").at("id").get<std::string>();
  CHECK(created.at("triple").at("origin") == "ExpertAdded");
  CHECK(created.at("triple").at("created_by") == "expert");
  auto dup = h.call("POST", "/triples", expert,
                    json{{"document_id", h.document_id}, {"subject", "Northwind Energy"}, {"predicate", "employs"}, {"object", "4,200 people"}}.dump());
  CHECK(dup.status == 200);
  CHECK(body_of(dup).at("inserted") == false);
  CHECK(body_of(h.call("POST", "/triples", expert, json{{"document_id", h.document_id}, {"subject", " "}, {"predicate", "p"}, {"object", "o"}}.dump())).at("code") == "empty_field");
  CHECK(body_of(h.call("POST", "/triples", expert, json{{"document_id", h.document_id}}.dump())).at("code") == "empty_field");
  CHECK(body_of(h.call("POST", "/triples", expert, "[1,2]")).at("code") == "invalid_argument");
  CHECK(body_of(h.call("POST", "/triples", expert, json{{"document_id", "d404"}, {"subject", "a"}, {"predicate", "b"}, {"object", "c"}}.dump())).at("code") == "unknown_document");

  auto evidence = h.call_json("GET", "/triples/t2/evidence", h.guest());
  CHECK(evidence.at("document_id") == h.document_id);
  CHECK(evidence.at("page") == 1);
  CHECK(evidence.at("evidence_sentence") ==
        "The Board of Directors oversees climate-related risks and opportunities as part of its annual strategy review.");
  CHECK(h.call_json("GET", "/triples/" + tid + "/evidence", h.guest()).at("evidence_sentence") == "It employs 4,200 people.");

  auto before = h.call_json("GET", "/triples/t5", expert);
  auto deleted = h.call_json("DELETE", "/triples/t5", expert, {{"reason", "duplicate"}});
  CHECK(deleted.at("deleted") == true);
  CHECK(body_of(h.call("DELETE", "/triples/t5", expert)).at("code") == "already_deleted");
  auto restored = h.call_json("POST", "/triples/t5/restore", expert);
  for (const char* k : {"id", "subject", "predicate", "object", "status", "provenance", "origin", "graph_id", "subject_id", "object_id"}) {
    CHECK(restored.at(k) == before.at(k));
  }
  CHECK(restored.at("deleted") == false);
  CHECK(body_of(h.call("POST", "/triples/t5/restore", expert)).at("code") == "not_deleted");

  auto patched = h.call_json("PATCH", "/triples/t6", expert, {{"object", "a revised object"}});
  CHECK(patched.at("object") == "a revised object");
  CHECK(patched.at("last_updated_by") == "expert");
  CHECK(body_of(h.call("PATCH", "/triples/t6", expert, "{}")).at("code") == "empty_field");
  CHECK(body_of(h.call("GET", "/triples/t999", expert)).at("code") == "not_found");
  CHECK(h.call("GET", "/nowhere", expert).status == 404);
  CHECK(h.call("PUT", "/catalog", expert).status == 404);

  auto view = h.call_json("GET", "/documents/" + h.document_id + "/graph", h.guest());
  CHECK(view.at("edges").size() == 74);
  auto hood = h.call("GET", "/documents/" + h.document_id + "/graph", h.guest(), {},
                     {{"entity", "Board of Directors"}, {"hops", "1"}});
  CHECK(body_of(hood).at("edges").size() > 0);
  CHECK(h.call("GET", "/documents/" + h.document_id + "/graph", h.guest(), {}, {{"hops", "9"}}).status == 400);
  auto capped = h.call_json("GET", "/documents/" + h.document_id + "/graph", h.guest());
  auto small = h.call("GET", "/documents/" + h.document_id + "/graph", h.guest(), {}, {{"cap", "5"}});
  CHECK(body_of(small).at("edges").size() == 5);
  CHECK(body_of(small).at("truncated") == true);
  CHECK(capped.at("truncated") == false);
}

TEST_CASE("catalog sorts by name, status and date") {
  ServiceHarness h;
  auto intake = json::parse(read_file(ServiceHarness::intake_path()));
  intake["title"] = "Aardvark Holdings Climate Note";
  const auto expert = h.login("expert");
  auto res = h.call("POST", "/documents", expert, intake.dump(), {{"graph_id", "aardvark"}});
  REQUIRE(res.status == 202);
  h.svc->wait_for_jobs();
  const auto guest = h.guest();
  auto ids = [&](const std::map<std::string, std::string>& q) {
    std::vector<std::string> out;
    const auto body = body_of(h.call("GET", "/catalog", guest, {}, q));
    for (const auto& d : body.at("documents")) out.push_back(d.at("id"));
    return out;
  };
  CHECK(ids({}) == std::vector<std::string>{"d1", "d2"});
  CHECK(ids({{"sort", "date"}, {"order", "desc"}}) == std::vector<std::string>{"d2", "d1"});
  CHECK(ids({{"sort", "name"}}) == std::vector<std::string>{"d2", "d1"});
  h.call_json("POST", "/triples/t1/judgments", expert, {{"action", "keep"}}, 201);  // d1 becomes UnderReview
  CHECK(ids({{"sort", "status"}}) == std::vector<std::string>{"d2", "d1"});
  CHECK(ids({{"sort", "status"}, {"order", "desc"}}) == std::vector<std::string>{"d1", "d2"});
  CHECK(h.call("GET", "/catalog", guest, {}, {{"sort", "size"}}).status == 400);
  auto graphs = h.call_json("GET", "/graphs", guest);
  CHECK(graphs.at("graphs").size() == 2);
  CHECK(graphs.at("graphs")[1].at("id") == "aardvark");
}

TEST_CASE("ingestion runs asynchronously and reports chunk progress") {
  auto replay = std::make_shared<ingest::ReplayLlmClient>(ingest::ReplayLlmClient::from_file(ServiceHarness::replay_path()));
  auto gated = std::make_shared<GatedLlm>(replay);
  auto opts = ServiceHarness::default_options();
  opts.synchronous_ingest = false;
  opts.llm = gated;
  ServiceHarness h(opts, false);
  const auto expert = h.login("expert");
  auto accepted = h.call("POST", "/documents", expert, read_file(ServiceHarness::intake_path()));
  REQUIRE(accepted.status == 202);
  const auto id = body_of(accepted).at("document_id").get<std::string>();
  auto during = h.call_json("GET", "/documents/" + id + "/report", expert);
  CHECK(during.at("state") == "Ingesting");
  CHECK(during.at("progress").at("status") == "running");
  CHECK(during.at("report").is_null());
  gated->open();
  h.svc->wait_for_jobs();
  auto done = h.call_json("GET", "/documents/" + id + "/report", expert);
  CHECK(done.at("state") == "Draft");
  CHECK(done.at("progress").at("status") == "done");
  CHECK(done.at("progress").at("chunks_done") == 3);
  CHECK(done.at("progress").at("chunk_count") == 3);
  CHECK(done.at("report").at("triples_inserted") == 73);

  // A replay miss fails the job and leaves a visible error.
  auto odd = json::parse(read_file(ServiceHarness::intake_path()));
  odd["pages"][0]["text"] = "A different report entirely.";
  auto second = h.call("POST", "/documents", expert, odd.dump());
  h.svc->wait_for_jobs();
  auto failed = h.call_json("GET", "/documents/" + body_of(second).at("document_id").get<std::string>() + "/report", expert);
  CHECK(failed.at("progress").at("status") == "failed");
  CHECK(failed.at("progress").at("error_code") == "replay_miss");

  CHECK(body_of(h.call("POST", "/documents", expert, "{\"title\": 1}")).at("code") == "invalid_argument");
  CHECK(h.call("POST", "/documents", expert, read_file(ServiceHarness::intake_path()), {{"standard", "esrs"}}).status == 400);
  CHECK(h.call("POST", "/documents", expert, read_file(ServiceHarness::intake_path()), {{"chunk_size", "100"}, {"overlap", "100"}}).status == 400);
}

TEST_CASE("replay mode makes no network calls through the whole API surface") {
  auto counter = std::make_shared<ingest::CountingTransport>();
  auto opts = ServiceHarness::default_options();
  opts.transport = counter;
  ServiceHarness h(opts);
  const auto expert = h.login("expert");
  h.call("POST", "/triples/t3/verify", expert);
  h.call("POST", "/analytics", expert, json{{"graph_id", h.graph_id}}.dump());
  h.call("POST", "/tasks/kgqa", expert, json{{"graph_id", h.graph_id}, {"question", "Who oversees climate-related risks?"}}.dump());
  h.ingest_fixture();
  CHECK(counter->calls() == 0);

  // The same counter does see traffic once a live client is built on it.
  service::ServiceConfig live;
  live.llm.mode = service::LlmMode::Live;
  live.llm.endpoint = "http://127.0.0.1:9/v1";
  live.llm.api_key_env = "K";
  auto client = service::make_llm_client(live, counter, env_with({{"K", "v"}}));
  CHECK_THROWS(client->complete({"m", "s", "u", 0.0}));
  CHECK(counter->calls() == 1);
}

TEST_CASE("tasks, fusion and verification endpoints") {
  ServiceHarness h;
  const auto guest = h.guest();
  const auto g = h.graph_id;
  auto kgqa = h.call_json("POST", "/tasks/kgqa", guest, {{"graph_id", g}, {"question", "Who oversees climate-related risks?"}});
  CHECK(kgqa.value("answer", json()).is_null());
  CHECK(kgqa.at("answer_error") == "replay_miss");  // the bundled fixture records ingestion only
  CHECK_FALSE(kgqa.at("evidence_subgraph").at("edges").empty());
  auto symbolic = h.call_json("POST", "/tasks/kgqa", guest, {{"graph_id", g}, {"question", "Who oversees climate-related risks?"}, {"use_llm", false}});
  CHECK_FALSE(symbolic.contains("answer_error"));
  CHECK(body_of(h.call("POST", "/tasks/kgqa", guest, json{{"graph_id", g}, {"question", "zebra"}}.dump())).at("code") == "no_entity_match");
  CHECK(body_of(h.call("POST", "/tasks/paths", guest, json{{"graph_id", g}, {"source", "Board of Directors"}, {"target", "Sustainability Committee"}}.dump())).at("paths").size() >= 1);
  CHECK(body_of(h.call("POST", "/tasks/compare", guest, json{{"graph_id", g}, {"entities", {"Board of Directors"}}}.dump())).at("code") == "too_few_entities");
  CHECK(h.call("POST", "/tasks/duplicates", guest, json{{"graph_id", g}}.dump()).status == 200);
  auto gaps = h.call_json("POST", "/tasks/gaps", guest, {{"graph_id", g}});
  CHECK(gaps.contains("missing_topics"));
  CHECK(h.call("POST", "/tasks/diagnostics", guest, json{{"graph_id", g}}.dump()).status == 200);
  auto trace = h.call_json("POST", "/tasks/trace", guest, {{"graph_id", g}, {"page", 3}});
  CHECK(trace.at("triples").size() > 10);
  for (const auto& row : trace.at("triples")) CHECK(row.at("provenance").at("page") == 3);
  CHECK(body_of(h.call("POST", "/tasks/teleport", guest, json{{"graph_id", g}}.dump())).at("code") == "not_found");
  CHECK(body_of(h.call("POST", "/tasks/diagnostics", guest, json{{"graph_id", "nope"}}.dump())).at("code") == "unknown_graph");
  CHECK(body_of(h.call("POST", "/analytics", guest, json{{"graph_id", g}}.dump())).at("code") == "replay_miss");

  const auto other = h.ingest_fixture();
  const auto g2 = h.svc->store().get_document(other).graph_id;
  auto overlaps = h.call_json("POST", "/fusion/overlaps", guest, {{"graph_ids", {g, g2}}});
  CHECK(overlaps.at("shared_entities").size() > 10);
  CHECK(body_of(h.call("POST", "/fusion/overlaps", guest, json{{"graph_ids", {g}}}.dump())).at("code") == "need_two_graphs");
  auto preview = h.call_json("POST", "/fusion/preview", guest, {{"graph_ids", {g, g2}}, {"cap", 10}});
  CHECK(preview.at("edges").size() == 10);
  CHECK(preview.at("truncated") == true);
  const auto expert = h.login("expert");
  auto merged = h.call_json("POST", "/fusion/merge", expert,
                            {{"plan", {{"actions", {{{"kind", "merge"}, {"graph_id", g2}, {"from", {"Board of Directors", "directors"}}, {"to", "Board of Directors"}}}}}}});
  CHECK(merged.at("plan").at("status") == "applied");
  CHECK(merged.at("plan").at("author") == "expert");
  CHECK(merged.at("merged") == 1);

  auto verify = h.call("POST", "/triples/t3/verify", expert);
  CHECK(verify.status == 502);
  CHECK(body_of(verify).at("code") == "replay_miss");
}

TEST_CASE("audit endpoints and tamper detection") {
  ServiceHarness h;
  const auto expert = h.login("expert");
  auto clean = h.call_json("GET", "/audit/verify", expert);
  CHECK(clean.at("ok") == true);
  CHECK(clean.at("entries") == h.svc->store().event_count());
  auto all = h.call_json("GET", "/audit", expert);
  CHECK(all.at("entries").size() == h.svc->store().event_count());
  auto later = h.call("GET", "/audit", expert, {}, {{"from_seq", "10"}});
  const auto later_body = body_of(later);
  CHECK_FALSE(later_body.at("entries").empty());
  for (const auto& e : later_body.at("entries")) CHECK(e.at("seq").get<int>() >= 10);
  auto scoped = h.call("GET", "/audit", expert, {}, {{"document_id", h.document_id}});
  CHECK(body_of(scoped).at("entries").size() > 70);
  CHECK(h.call("GET", "/audit", expert, {}, {{"from_seq", "x"}}).status == 400);

  // Corrupt one byte of the persisted log; a verifier over the file names it.
  const auto log = h.config.log_path();
  auto bytes = read_file(log);
  std::size_t start = 0;
  for (int line = 0; line < 4; ++line) start = bytes.find('\n', start) + 1;
  const auto end = bytes.find('\n', start);
  const auto seq = json::parse(bytes.substr(start, end - start)).at("seq").get<std::uint64_t>();
  bytes[start + (end - start) / 2] ^= 0x01;
  write_file(log, bytes);
  auto v = store::EventLog::verify_file(log);
  CHECK_FALSE(v.ok);
  REQUIRE(v.first_bad_seq);
  CHECK(*v.first_bad_seq == seq);
}

TEST_CASE("golden response bodies") {
  ServiceHarness h;
  const auto expert = h.login("expert");
  const auto guest = h.guest();
  h.call_json("POST", "/triples/t2/judgments", expert, {{"action", "keep"}, {"feedback", "clear evidence"}}, 201);
  h.call_json("POST", "/triples/t2/judgments", h.login("expert2"),
              {{"action", "edit"}, {"suggested_triple", {{"subject", "Board"}, {"predicate", "oversees"}, {"object", "climate risks"}}}}, 201);

  struct Case {
    std::string name;
    std::string method;
    std::string path;
    std::string token;
    std::string body;
    std::map<std::string, std::string> query;
  };
  const std::vector<Case> cases = {
      {"catalog", "GET", "/catalog", guest, "", {}},
      {"document_report", "GET", "/documents/" + h.document_id + "/report", guest, "", {}},
      {"triple", "GET", "/triples/t2", guest, "", {}},
      {"evidence", "GET", "/triples/t2/evidence", guest, "", {}},
      {"judgments", "GET", "/triples/t2/judgments", guest, "", {}},
      {"readiness", "GET", "/documents/" + h.document_id + "/readiness", guest, "", {}},
      {"neighborhood", "POST", "/tasks/neighborhood", guest, json{{"graph_id", h.graph_id}, {"entity", "Audit Committee"}}.dump(), {}},
      {"compare", "POST", "/tasks/compare", guest, json{{"graph_id", h.graph_id}, {"entities", {"Board of Directors", "transition plan"}}}.dump(), {}},
      {"diagnostics", "POST", "/tasks/diagnostics", guest, json{{"graph_id", h.graph_id}}.dump(), {}},
      {"gaps", "POST", "/tasks/gaps", guest, json{{"graph_id", h.graph_id}}.dump(), {}},
      {"export_csv_filtered", "GET", "/export/edges", guest, "", {{"graph_id", h.graph_id}, {"format", "csv"}, {"predicates", "were,was"}}},
      {"certify_not_ready", "POST", "/documents/" + h.document_id + "/certify", h.login("meta"), "", {}},
      {"guest_denied", "POST", "/triples", guest, "", {}},
      {"unauthenticated", "GET", "/catalog", "", "", {}},
  };
  const bool update = std::getenv("CERTKG_UPDATE_GOLDEN") != nullptr;
  for (const auto& c : cases) {
    auto res = h.call(c.method, c.path, c.token, c.body, c.query);
    std::string actual = res.body;
    if (res.content_type == "application/json") {
      auto j = json::parse(res.body);
      // Wall-clock durations vary run to run; everything else is pinned by the stepping clock.
      if (j.contains("report") && j["report"].is_object()) j["report"]["duration_ms"] = 0;
      actual = j.dump(2) + "\n";
    }
    actual = std::to_string(res.status) + "\n" + actual;
    const auto path = golden_path("api/" + c.name + ".golden");
    if (update) {
      std::filesystem::create_directories(path.parent_path());
      write_file(path, actual);
      continue;
    }
    INFO(c.name);
    REQUIRE(std::filesystem::exists(path));
    CHECK(read_file(path) == actual);
  }
}

TEST_CASE("the HTTP binding serves the router over a socket") {
  ServiceHarness h;
  service::HttpServer server(*h.svc);
  const int port = server.bind("127.0.0.1", 0);
  std::thread t([&] { server.listen_after_bind(); });
  httplib::Client cli("127.0.0.1", port);
  auto guest = cli.Post("/auth/guest", "", "application/json");
  REQUIRE(guest);
  CHECK(guest->status == 200);
  const auto token = json::parse(guest->body).at("token").get<std::string>();
  httplib::Headers auth{{"Authorization", "Bearer " + token}};
  auto catalog = cli.Get("/catalog?sort=name&order=desc", auth);
  REQUIRE(catalog);
  CHECK(catalog->status == 200);
  CHECK(json::parse(catalog->body).at("order") == "desc");
  auto csv = cli.Get(("/export/edges?graph_id=" + h.graph_id).c_str(), httplib::Headers{{"Authorization", "Bearer " + token}, {"Accept", "text/csv"}});
  REQUIRE(csv);
  CHECK(csv->get_header_value("Content-Type").rfind("text/csv", 0) == 0);
  auto denied = cli.Delete("/triples/t1", auth);
  REQUIRE(denied);
  CHECK(denied->status == 403);
  CHECK(json::parse(denied->body).at("code") == "unauthorized");
  server.stop();
  t.join();
}
