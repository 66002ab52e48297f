#include "service_harness.hpp"

#include "certkg/governance/roles.hpp"
#include "certkg/text.hpp"

#include <set>
#include <stdexcept>

namespace certkg::testing {

using governance::Role;
using nlohmann::json;

namespace {

const std::set<Role> kAll{Role::Guest, Role::Expert, Role::MetaExpert, Role::Admin};
const std::set<Role> kCurators{Role::Expert, Role::MetaExpert};
const std::set<Role> kMeta{Role::MetaExpert};
const std::set<Role> kAuditors{Role::Expert, Role::MetaExpert, Role::Admin};
const std::set<Role> kAdmin{Role::Admin};

std::vector<std::string> segments(const std::string& path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    auto j = path.find('/', i);
    if (j == std::string::npos) j = path.size();
    if (j > i) out.push_back(path.substr(i, j - i));
    i = j + 1;
  }
  return out;
}

bool template_matches(const std::string& tmpl, const std::string& path) {
  const auto a = segments(tmpl);
  const auto b = segments(path);
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool wildcard = a[i].size() > 2 && a[i].front() == '{' && b[i].front() != '{';
    if (!wildcard && a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace

std::string role_username(Role role) {
  switch (role) {
    case Role::Expert: return "expert";
    case Role::MetaExpert: return "meta";
    case Role::Admin: return "admin";
    case Role::Guest: break;
  }
  return "guest";
}

std::filesystem::path ServiceHarness::intake_path() { return fixture_path("ifrs_s2/intake.json"); }
std::filesystem::path ServiceHarness::replay_path() { return fixture_path("ifrs_s2/replay.jsonl"); }
std::filesystem::path ServiceHarness::review_path() { return fixture_path("ifrs_s2/review.json"); }

service::ServiceOptions ServiceHarness::default_options() {
  service::ServiceOptions o;
  o.clock = fixed_clock();
  o.synchronous_ingest = true;
  return o;
}

ServiceHarness::ServiceHarness(service::ServiceOptions options, bool seed_fixture,
                               const std::filesystem::path& data_dir)
    : dir(std::make_unique<TempDir>("certkg-svc")) {
  config.data_dir = data_dir.empty() ? dir->path() / "data" : data_dir;
  config.llm.mode = service::LlmMode::Replay;
  config.llm.replay_fixture = replay_path();
  config.pbkdf2_iterations = 1000;
  svc = std::make_unique<service::Service>(config, std::move(options));
  for (auto role : {Role::Expert, Role::MetaExpert, Role::Admin}) {
    svc->accounts().create_account(role_username(role), "pw-" + role_username(role), role);
  }
  svc->accounts().create_account("expert2", "pw-expert2", Role::Expert);
  if (seed_fixture) {
    document_id = ingest_fixture();
    graph_id = svc->store().get_document(document_id).graph_id;
  }
}

service::ApiResponse ServiceHarness::call(const std::string& method, const std::string& path, const std::string& token,
                                          const std::string& body, const std::map<std::string, std::string>& query,
                                          const std::map<std::string, std::string>& headers) {
  service::ApiRequest r;
  r.method = method;
  r.path = path;
  r.query = query;
  r.headers = headers;
  if (!token.empty()) r.headers["authorization"] = "Bearer " + token;
  r.body = body;
  return svc->handle(r);
}

json ServiceHarness::call_json(const std::string& method, const std::string& path, const std::string& token,
                               const json& body, int expected_status) {
  auto res = call(method, path, token, body.is_null() ? std::string() : body.dump());
  if (res.status != expected_status) {
    throw std::runtime_error(method + " " + path + " returned " + std::to_string(res.status) + ": " + res.body);
  }
  return json::parse(res.body);
}

std::string ServiceHarness::login(const std::string& username) {
  return call_json("POST", "/auth/login", {}, {{"username", username}, {"password", "pw-" + username}})
      .at("token")
      .get<std::string>();
}

std::string ServiceHarness::guest() { return call_json("POST", "/auth/guest", {}).at("token").get<std::string>(); }

std::string ServiceHarness::session(Role role) { return role == Role::Guest ? guest() : login(role_username(role)); }

std::string ServiceHarness::ingest_fixture() {
  auto res = call("POST", "/documents", login("expert"), read_file(intake_path()));
  if (res.status != 202) throw std::runtime_error("ingest failed: " + res.body);
  const auto id = json::parse(res.body).at("document_id").get<std::string>();
  svc->wait_for_jobs();
  return id;
}

const std::vector<MatrixRow>& documented_matrix() {
  static const std::vector<MatrixRow> rows = {
      {"POST", "/auth/logout", kAll, false},
      {"GET", "/catalog", kAll, false},
      {"GET", "/graphs", kAll, false},
      {"POST", "/documents", kCurators, true},
      {"GET", "/documents/{id}", kAll, false},
      {"GET", "/documents/{id}/report", kAll, false},
      {"GET", "/documents/{id}/graph", kAll, false},
      {"GET", "/documents/{id}/readiness", kAll, false},
      {"POST", "/documents/{id}/certify", kMeta, true},
      {"POST", "/triples", kCurators, true},
      {"GET", "/triples/{id}", kAll, false},
      {"PATCH", "/triples/{id}", kCurators, true},
      {"DELETE", "/triples/{id}", kCurators, true},
      {"POST", "/triples/{id}/restore", kCurators, true},
      {"GET", "/triples/{id}/evidence", kAll, false},
      {"POST", "/triples/{id}/judgments", kCurators, true},
      {"GET", "/triples/{id}/judgments", kAll, false},
      {"POST", "/triples/{id}/verify", kCurators, true},
      {"POST", "/triples/{id}/finalize", kMeta, true},
      {"POST", "/fusion/overlaps", kAll, false},
      {"POST", "/fusion/preview", kAll, false},
      {"POST", "/fusion/merge", kCurators, true},
      {"POST", "/tasks/kgqa", kAll, false},
      {"POST", "/tasks/paths", kAll, false},
      {"POST", "/tasks/neighborhood", kAll, false},
      {"POST", "/tasks/compare", kAll, false},
      {"POST", "/tasks/duplicates", kAll, false},
      {"POST", "/tasks/gaps", kAll, false},
      {"POST", "/tasks/diagnostics", kAll, false},
      {"POST", "/tasks/trace", kAll, false},
      {"POST", "/analytics", kAll, false},
      {"GET", "/audit", kAuditors, false},
      {"GET", "/audit/verify", kAuditors, false},
      {"GET", "/export/edges", kAll, false},
      {"GET", "/admin/accounts", kAdmin, false},
      {"POST", "/admin/accounts", kAdmin, true},
      {"POST", "/admin/accounts/{id}/deactivate", kAdmin, true},
      {"POST", "/admin/reset-tokens", kAdmin, true},
      {"POST", "/admin/reset-tokens/revoke", kAdmin, true},
  };
  return rows;
}

MatrixOutcome run_permission_matrix(ServiceHarness& h) {
  MatrixOutcome out;
  const auto& rows = documented_matrix();

  // Coverage in both directions: no served route is left out of the matrix and
  // no matrix row names a route the service does not serve.
  const auto table = service::route_table();
  for (const auto& r : table) {
    if (!r.permission) continue;
    bool covered = false;
    for (const auto& m : rows) covered |= m.method == r.method && template_matches(r.path, m.path_template);
    if (!covered) out.failures.push_back("route missing from matrix: " + r.method + " " + r.path);
  }
  for (const auto& m : rows) {
    bool served = false;
    for (const auto& r : table) served |= r.method == m.method && template_matches(r.path, m.path_template);
    if (!served) out.failures.push_back("matrix row not served: " + m.method + " " + m.path_template);
  }

  std::vector<std::string> victims;
  for (int i = 0; i < 8; ++i) {
    victims.push_back(h.svc->accounts().create_account("victim" + std::to_string(i), "pw-victim", Role::Guest).id);
  }
  std::size_t victim_next = 0;
  std::size_t fresh = 0;

  auto concrete = [&](const MatrixRow& m) {
    std::string p = m.path_template;
    auto replace = [&](const std::string& from, const std::string& to) {
      auto pos = p.find(from);
      if (pos != std::string::npos) p.replace(pos, from.size(), to);
    };
    if (p.rfind("/documents/", 0) == 0) replace("{id}", h.document_id);
    if (p.rfind("/admin/accounts/", 0) == 0) replace("{id}", victims[victim_next++ % victims.size()]);
    if (p == "/triples/{id}" && m.method == "DELETE") replace("{id}", "t11");
    if (p == "/triples/{id}/restore") replace("{id}", "t11");
    replace("{id}", "t12");
    return p;
  };
  auto body_for = [&](const MatrixRow& m) -> std::string {
    const auto& p = m.path_template;
    const auto& g = h.graph_id;
    if (p == "/documents") return read_file(ServiceHarness::intake_path());
    if (p == "/triples") {
      return json{{"document_id", h.document_id}, {"subject", "Matrix Co"}, {"predicate", "tests"}, {"object", "roles"}}
          .dump();
    }
    if (p == "/triples/{id}" && m.method == "PATCH") return json{{"object", "patched object"}}.dump();
    if (p == "/triples/{id}/judgments") return json{{"action", "keep"}}.dump();
    if (p == "/triples/{id}/finalize") return json{{"decision", "certify"}}.dump();
    if (p == "/fusion/overlaps" || p == "/fusion/preview") return json{{"graph_ids", {g, g}}}.dump();
    if (p == "/fusion/merge") {
      return json{{"actions",
                   {{{"kind", "rename"}, {"graph_id", g}, {"from", "Audit Committee"}, {"to", "Audit Committee (Board)"}}}}}
          .dump();
    }
    if (p == "/tasks/kgqa") return json{{"graph_id", g}, {"question", "Who oversees climate-related risks?"}, {"use_llm", false}}.dump();
    if (p == "/tasks/paths") return json{{"graph_id", g}, {"source", "Board of Directors"}, {"target", "Audit Committee"}}.dump();
    if (p == "/tasks/neighborhood") return json{{"graph_id", g}, {"entity", "Board of Directors"}}.dump();
    if (p == "/tasks/compare") return json{{"graph_id", g}, {"entities", {"Board of Directors", "transition plan"}}}.dump();
    if (p == "/tasks/trace") return json{{"graph_id", g}, {"entity", "Board of Directors"}}.dump();
    if (p.rfind("/tasks/", 0) == 0 || p == "/analytics") return json{{"graph_id", g}}.dump();
    if (p == "/admin/accounts") {
      return json{{"username", "fresh" + std::to_string(fresh++)}, {"password", "pw-fresh"}, {"role", "expert"}}.dump();
    }
    if (p == "/admin/reset-tokens") return json{{"account_id", victims[0]}}.dump();
    if (p == "/admin/reset-tokens/revoke") return json{{"token", "0000"}}.dump();
    return {};
  };
  const std::map<std::string, std::string> export_query{{"graph_id", h.graph_id}};

  for (const auto& m : rows) {
    const auto path = concrete(m);
    const auto query = m.path_template == "/export/edges" ? export_query : std::map<std::string, std::string>{};
    const std::string label = m.method + " " + m.path_template;

    // No token, then a token that was never issued.
    for (const std::string token : {std::string(), std::string("not-a-session")}) {
      const auto before = h.svc->store().event_count();
      auto res = h.call(m.method, path, token, body_for(m), query);
      const auto code = json::parse(res.body).value("code", "");
      if (res.status != 401 || code != "unauthenticated") {
        out.failures.push_back(label + " without a valid session: " + std::to_string(res.status) + " " + res.body);
      }
      if (h.svc->store().event_count() != before) out.failures.push_back(label + " wrote events without a session");
    }

    for (auto role : governance::all_roles()) {
      ++out.pairs;
      const bool expect_allowed = m.allowed.contains(role);
      const auto token = h.session(role);
      const auto before = h.svc->store().event_count();
      // Denied calls carry a malformed body: a 403 (not a 400) shows the role
      // check ran before the body was read.
      auto res = h.call(m.method, path, token, expect_allowed ? body_for(m) : "{malformed", query);
      const std::string who = std::string(governance::to_string(role));
      if (expect_allowed) {
        if (res.status == 401 || res.status == 403) {
          out.failures.push_back(label + " as " + who + " should be allowed, got " + std::to_string(res.status) + " " +
                                 res.body);
        }
      } else {
        const auto body = json::parse(res.body);
        if (res.status != 403 || body.value("code", "") != "unauthorized") {
          out.failures.push_back(label + " as " + who + " should be 403 unauthorized, got " +
                                 std::to_string(res.status) + " " + res.body);
        }
        if (h.svc->store().event_count() != before) out.failures.push_back(label + " as " + who + " wrote events");
      }
      if (role == Role::Guest && m.mutation) {
        ++out.guest_mutations;
        if (res.status == 403) ++out.guest_mutations_denied;
      }
    }
  }
  return out;
}

service::ApiResponse run_fixture_review(ServiceHarness& h) {
  const auto review = json::parse(read_file(ServiceHarness::review_path()));
  std::set<std::tuple<std::string, std::string, std::string>> reject;
  for (const auto& r : review.at("reject")) {
    reject.emplace(r.at("subject").get<std::string>(), r.at("predicate").get<std::string>(),
                   r.at("object").get<std::string>());
  }
  const auto expert = h.login("expert");
  auto res = h.call("GET", "/documents/" + h.document_id + "/graph", expert, {}, {{"cap", "1000"}});
  const auto edges = json::parse(res.body).at("edges");
  for (const auto& e : edges) {
    const auto key = std::make_tuple(e.at("subject").get<std::string>(), e.at("predicate").get<std::string>(),
                                     e.at("object").get<std::string>());
    const json body = reject.contains(key) ? json{{"action", "delete"}, {"apply", true}, {"feedback", "not supported"}}
                                           : json{{"action", "keep"}};
    h.call_json("POST", "/triples/" + e.at("id").get<std::string>() + "/judgments", expert, body, 201);
  }
  return h.call("POST", "/documents/" + h.document_id + "/certify", h.login("meta"));
}

}  // namespace certkg::testing
