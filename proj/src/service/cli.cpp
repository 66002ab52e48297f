#include "certkg/service/cli.hpp"

#include "certkg/governance/accounts.hpp"
#include "certkg/governance/roles.hpp"
#include "certkg/ingest/pipeline.hpp"
#include "certkg/service/api.hpp"
#include "certkg/service/config.hpp"
#include "certkg/service/export.hpp"
#include "certkg/service/server.hpp"
#include "certkg/text.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

namespace certkg::service {

namespace {

using nlohmann::json;

constexpr const char* kCliActor = "cli";

std::atomic<HttpServer*> g_server{nullptr};

extern "C" void stop_on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

std::string line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

struct Options {
  std::string config_path;
  // ingest / record / replay
  std::string intake;
  std::string standard;
  std::optional<std::size_t> chunk_size;
  std::optional<std::size_t> overlap;
  std::string graph_id;
  // export
  std::string export_graph;
  std::string format = "jsonl";
  std::vector<std::string> statuses;
  std::vector<std::string> document_ids;
  // fixtures
  std::string fixture_out;
  std::string script;
  std::string replay_fixture;
  // accounts
  std::string username;
  std::string password;
  std::string password_env;
  std::string role;
};

ServiceConfig config_from(const Options& o) {
  if (o.config_path.empty()) throw Error(ErrorCode::InvalidConfig, "--config (or CERTKG_CONFIG) is required");
  return load_config(o.config_path);
}

// Registry and chunking from the config when one is given, defaults otherwise.
std::pair<ingest::PromptRegistry, ingest::IngestConfig> ingest_setup(const Options& o) {
  ServiceConfig cfg;
  if (!o.config_path.empty()) cfg = config_from(o);
  auto prompts = load_prompts(cfg);
  auto ic = make_ingest_config(cfg, prompts);
  if (!o.standard.empty()) {
    auto s = store::parse_standard(text::ascii_lower(text::trim(o.standard)));
    if (!s) throw Error(ErrorCode::InvalidArgument, "unknown standard '" + o.standard + "'");
    ic.standard_override = s;
  }
  if (o.chunk_size) ic.chunk.chunk_size = *o.chunk_size;
  if (o.overlap) ic.chunk.overlap = *o.overlap;
  ic.chunk.validate();
  ic.graph_id = o.graph_id;
  return {std::move(prompts), std::move(ic)};
}

std::unique_ptr<store::GraphStore> open_store(const ServiceConfig& cfg) {
  std::filesystem::create_directories(cfg.data_dir);
  store::GraphStore::Options so;
  so.log_path = cfg.log_path();
  if (std::filesystem::exists(cfg.snapshot_path())) so.snapshot_path = cfg.snapshot_path();
  return std::make_unique<store::GraphStore>(std::move(so));
}

int cmd_serve(const Options& o, std::ostream& out) {
  Service service(config_from(o));
  HttpServer server(service);
  const int port = server.bind(service.config().host, service.config().port);
  out << line({{"listening", service.config().host + ":" + std::to_string(port)}}) << std::endl;
  g_server.store(&server);
  std::signal(SIGINT, stop_on_signal);
  std::signal(SIGTERM, stop_on_signal);
  server.listen_after_bind();
  g_server.store(nullptr);
  return 0;
}

int cmd_ingest(const Options& o, std::ostream& out) {
  const auto cfg = config_from(o);
  auto [prompts, ic] = ingest_setup(o);
  auto llm = make_llm_client(cfg, nullptr);
  auto store = open_store(cfg);
  auto report = ingest::ingest_document(ingest::load_intake(o.intake), ic, prompts, *llm, *store, kCliActor);
  out << line(ingest::to_json(report)) << '\n';
  return 0;
}

int cmd_export(const Options& o, std::ostream& out) {
  const auto cfg = config_from(o);
  auto store = open_store(cfg);
  store::EdgeFilter filter;
  if (!o.statuses.empty()) {
    std::set<store::TripleStatus> s;
    for (const auto& v : o.statuses) s.insert(store::parse_triple_status(v));
    filter.statuses = s;
  }
  if (!o.document_ids.empty()) filter.document_ids = std::set<std::string>(o.document_ids.begin(), o.document_ids.end());
  const auto rows = store->export_edges(o.export_graph, filter);
  out << (o.format == "csv" ? edges_to_csv(rows) : edges_to_jsonl(rows));
  return 0;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const auto cfg = config_from(o);
  // Opening the store replays the log, which itself fails on a broken chain;
  // verification reads the raw file so the first bad sequence is reported.
  const auto v = store::EventLog::verify_file(cfg.log_path());
  json j{{"ok", v.ok}, {"entries", v.entries}};
  if (v.first_bad_seq) j["first_bad_seq"] = *v.first_bad_seq;
  if (!v.reason.empty()) j["reason"] = v.reason;
  out << line(j) << '\n';
  return v.ok ? 0 : 1;
}

std::vector<ingest::ScriptedLlmClient::Step> load_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read script " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("script is not JSON: ") + e.what());
  }
  if (!j.is_array()) throw Error(ErrorCode::InvalidArgument, "script must be an array of responses");
  std::vector<ingest::ScriptedLlmClient::Step> steps;
  for (const auto& s : j) {
    if (s.is_string()) {
      steps.push_back({s.get<std::string>(), false});
    } else if (s.is_object() && s.value("fail", false)) {
      steps.push_back({"", true});
    } else if (s.is_object() && s.contains("text") && s.at("text").is_string()) {
      steps.push_back({s.at("text").get<std::string>(), false});
    } else {
      throw Error(ErrorCode::InvalidArgument, "script entries are strings, {\"text\": ...} or {\"fail\": true}");
    }
  }
  return steps;
}

int cmd_record(const Options& o, std::ostream& out) {
  auto [prompts, ic] = ingest_setup(o);
  std::unique_ptr<ingest::LlmClient> inner;
  if (!o.script.empty()) {
    inner = std::make_unique<ingest::ScriptedLlmClient>(load_script(o.script));
  } else {
    const auto cfg = config_from(o);
    if (cfg.llm.mode != LlmMode::Live) {
      throw Error(ErrorCode::InvalidConfig, "record-fixtures needs a live-mode config or --script");
    }
    inner = make_llm_client(cfg, nullptr);
  }
  std::filesystem::remove(o.fixture_out);
  ingest::IngestReport report;
  {
    ingest::RecordingLlmClient recorder(*inner, o.fixture_out);
    store::GraphStore scratch;  // fixtures are the product; the graph is discarded
    report = ingest::ingest_document(ingest::load_intake(o.intake), ic, prompts, recorder, scratch, kCliActor);
  }
  out << line(ingest::to_json(report)) << '\n';
  return 0;
}

int cmd_replay_check(const Options& o, std::ostream& out) {
  auto [prompts, ic] = ingest_setup(o);
  auto replay = ingest::ReplayLlmClient::from_file(o.replay_fixture);
  store::GraphStore scratch;
  auto report = ingest::ingest_document(ingest::load_intake(o.intake), ic, prompts, replay, scratch, kCliActor);
  out << line(ingest::to_json(report)) << '\n';
  return 0;
}

int cmd_account_create(const Options& o, std::ostream& out) {
  const auto cfg = config_from(o);
  auto role = governance::parse_role(o.role);
  if (!role) throw Error(ErrorCode::InvalidArgument, "unknown role '" + o.role + "'");
  std::string password = o.password;
  if (!o.password_env.empty()) {
    const char* v = std::getenv(o.password_env.c_str());
    if (v == nullptr) throw Error(ErrorCode::InvalidConfig, "environment variable " + o.password_env + " is not set");
    password = v;
  }
  if (password.empty()) throw Error(ErrorCode::EmptyField, "a password is required (--password or --password-env)");
  std::filesystem::create_directories(cfg.data_dir);
  governance::AccountStore::Options ao;
  ao.path = cfg.accounts_path();
  ao.pbkdf2_iterations = cfg.pbkdf2_iterations;
  governance::AccountStore accounts(ao);
  auto account = accounts.create_account(o.username, password, *role);
  auto store = open_store(cfg);
  store->write([&](store::GraphStore::Writer& w) {
    w.audit_only("account_created", account.id,
                 {{"username", account.username}, {"role", governance::to_string(*role)}}, kCliActor);
  });
  out << line(governance::account_summary(account)) << '\n';
  return 0;
}

void print_error(std::ostream& err, std::string_view code, const std::string& message) {
  err << line({{"error", code}, {"message", message}}) << '\n';
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Certified knowledge-graph service and tools", "certkg"};
  app.require_subcommand(1);
  app.add_option("-c,--config", o.config_path, "YAML service configuration")->envname("CERTKG_CONFIG");

  auto add_chunking = [&](CLI::App* sub) {
    sub->add_option("--standard", o.standard, "skip identification and use this standard");
    sub->add_option("--chunk-size", o.chunk_size, "characters per chunk");
    sub->add_option("--overlap", o.overlap, "characters shared by adjacent chunks");
    sub->add_option("--graph-id", o.graph_id, "target graph (default: a new graph named after the document)");
  };

  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  auto* ingest_cmd = app.add_subcommand("ingest", "ingest an intake document into the configured store");
  ingest_cmd->add_option("intake", o.intake, "intake JSON")->required();
  add_chunking(ingest_cmd);
  auto* export_cmd = app.add_subcommand("export", "export a graph's edges");
  export_cmd->add_option("graph", o.export_graph, "graph id")->required();
  export_cmd->add_option("--format", o.format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
  export_cmd->add_option("--status", o.statuses, "keep only these triple statuses");
  export_cmd->add_option("--document", o.document_ids, "keep only these documents");
  auto* verify = app.add_subcommand("verify-audit", "verify the audit hash chain");
  auto* record = app.add_subcommand("record-fixtures", "run ingestion through a recorder and write a replay fixture");
  record->add_option("intake", o.intake, "intake JSON")->required();
  record->add_option("--out", o.fixture_out, "fixture JSONL to write")->required();
  record->add_option("--script", o.script, "JSON array of scripted responses instead of the live model");
  add_chunking(record);
  auto* replay = app.add_subcommand("replay-check", "re-run ingestion against a fixture and print the report");
  replay->add_option("fixture", o.replay_fixture, "replay fixture JSONL")->required();
  replay->add_option("--intake", o.intake, "intake JSON")->required();
  add_chunking(replay);
  auto* account = app.add_subcommand("account", "manage accounts");
  account->require_subcommand(1);
  auto* account_create = account->add_subcommand("create", "create an account");
  account_create->add_option("--username", o.username)->required();
  account_create->add_option("--password", o.password);
  account_create->add_option("--password-env", o.password_env, "read the password from this variable");
  account_create->add_option("--role", o.role, "guest, expert, meta_expert or admin")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what());
    return 2;
  }

  try {
    if (serve->parsed()) return cmd_serve(o, out);
    if (ingest_cmd->parsed()) return cmd_ingest(o, out);
    if (export_cmd->parsed()) return cmd_export(o, out);
    if (verify->parsed()) return cmd_verify(o, out);
    if (record->parsed()) return cmd_record(o, out);
    if (replay->parsed()) return cmd_replay_check(o, out);
    if (account_create->parsed()) return cmd_account_create(o, out);
  } catch (const Error& e) {
    print_error(err, error_code_name(e.code()), e.what());
    return 2;
  } catch (const std::exception& e) {
    print_error(err, error_code_name(ErrorCode::Io), e.what());
    return 2;
  }
  return 2;
}

}  // namespace certkg::service
