#include "certkg/service/config.hpp"

#include "certkg/error.hpp"

#include <yaml-cpp/yaml.h>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace certkg::service {

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidConfig, "config: " + what); }

void only_keys(const YAML::Node& node, const std::set<std::string>& allowed, const std::string& where) {
  if (!node.IsMap()) invalid(where + " must be a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) invalid("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& where) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    invalid("bad value for " + where);
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
}

ServiceConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir, const EnvLookup& env) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    invalid(std::string("YAML parse error: ") + e.what());
  }
  ServiceConfig c;
  if (!root || root.IsNull()) return c;
  only_keys(root, {"listen", "data_dir", "prompts", "llm", "thresholds", "ingest", "security"}, "root");

  if (auto n = root["listen"]) {
    only_keys(n, {"host", "port"}, "listen");
    if (n["host"]) c.host = scalar<std::string>(n["host"], "listen.host");
    if (n["port"]) c.port = scalar<int>(n["port"], "listen.port");
    if (c.port < 0 || c.port > 65535) invalid("listen.port out of range");
  }
  if (root["data_dir"]) c.data_dir = resolve(base_dir, scalar<std::string>(root["data_dir"], "data_dir"));
  if (root["prompts"]) c.prompts_path = resolve(base_dir, scalar<std::string>(root["prompts"], "prompts"));

  if (auto n = root["llm"]) {
    only_keys(n, {"mode", "model_id", "endpoint", "api_key_env", "replay_fixture", "timeout_seconds"}, "llm");
    const auto mode = n["mode"] ? scalar<std::string>(n["mode"], "llm.mode") : std::string("replay");
    if (mode == "live") {
      c.llm.mode = LlmMode::Live;
    } else if (mode == "replay") {
      c.llm.mode = LlmMode::Replay;
    } else {
      invalid("llm.mode must be live or replay");
    }
    if (n["model_id"]) c.llm.model_id = scalar<std::string>(n["model_id"], "llm.model_id");
    if (n["endpoint"]) c.llm.endpoint = scalar<std::string>(n["endpoint"], "llm.endpoint");
    if (n["api_key_env"]) c.llm.api_key_env = scalar<std::string>(n["api_key_env"], "llm.api_key_env");
    if (n["replay_fixture"]) {
      c.llm.replay_fixture = resolve(base_dir, scalar<std::string>(n["replay_fixture"], "llm.replay_fixture"));
    }
    if (n["timeout_seconds"]) c.llm.timeout = std::chrono::seconds(scalar<int>(n["timeout_seconds"], "llm.timeout_seconds"));
  }
  // Exactly one mode is active; settings of the other mode are rejected.
  if (c.llm.mode == LlmMode::Live) {
    if (!c.llm.replay_fixture.empty()) invalid("llm.replay_fixture is only valid in replay mode");
    if (c.llm.endpoint.empty()) invalid("llm.endpoint is required in live mode");
    if (c.llm.api_key_env.empty()) invalid("llm.api_key_env is required in live mode");
    if (!env(c.llm.api_key_env)) invalid("environment variable " + c.llm.api_key_env + " is not set");
  } else {
    if (!c.llm.endpoint.empty() || !c.llm.api_key_env.empty()) {
      invalid("llm.endpoint and llm.api_key_env are only valid in live mode");
    }
    if (c.llm.replay_fixture.empty()) invalid("llm.replay_fixture is required in replay mode");
  }

  if (auto n = root["thresholds"]) {
    only_keys(n, {"coverage_threshold", "min_judgments", "edge_cap", "session_ttl_hours", "reset_token_ttl_minutes"},
              "thresholds");
    if (n["coverage_threshold"]) {
      c.governance.coverage_threshold = scalar<double>(n["coverage_threshold"], "thresholds.coverage_threshold");
      if (c.governance.coverage_threshold < 0.0 || c.governance.coverage_threshold > 1.0) {
        invalid("thresholds.coverage_threshold must be within [0, 1]");
      }
    }
    if (n["min_judgments"]) {
      const int m = scalar<int>(n["min_judgments"], "thresholds.min_judgments");
      if (m < 1) invalid("thresholds.min_judgments must be at least 1");
      c.governance.min_judgments = static_cast<std::size_t>(m);
    }
    if (n["edge_cap"]) {
      const int cap = scalar<int>(n["edge_cap"], "thresholds.edge_cap");
      if (cap < 1) invalid("thresholds.edge_cap must be positive");
      c.edge_cap = static_cast<std::size_t>(cap);
    }
    if (n["session_ttl_hours"]) {
      c.session_ttl = std::chrono::hours(scalar<int>(n["session_ttl_hours"], "thresholds.session_ttl_hours"));
    }
    if (n["reset_token_ttl_minutes"]) {
      c.reset_token_ttl =
          std::chrono::minutes(scalar<int>(n["reset_token_ttl_minutes"], "thresholds.reset_token_ttl_minutes"));
    }
  }
  if (auto n = root["ingest"]) {
    only_keys(n, {"chunk_size", "overlap", "retry_attempts", "retry_base_delay_ms"}, "ingest");
    if (n["chunk_size"] || n["overlap"]) {
      ingest::ChunkConfig chunk;
      if (n["chunk_size"]) chunk.chunk_size = scalar<std::size_t>(n["chunk_size"], "ingest.chunk_size");
      if (n["overlap"]) chunk.overlap = scalar<std::size_t>(n["overlap"], "ingest.overlap");
      try {
        chunk.validate();
      } catch (const Error& e) {
        invalid(e.what());
      }
      c.chunk = chunk;
    }
    if (n["retry_attempts"]) c.retry.attempts = scalar<int>(n["retry_attempts"], "ingest.retry_attempts");
    if (n["retry_base_delay_ms"]) {
      c.retry.base_delay = std::chrono::milliseconds(scalar<int>(n["retry_base_delay_ms"], "ingest.retry_base_delay_ms"));
    }
    if (c.retry.attempts < 1) invalid("ingest.retry_attempts must be at least 1");
  }
  if (auto n = root["security"]) {
    only_keys(n, {"pbkdf2_iterations"}, "security");
    if (n["pbkdf2_iterations"]) {
      c.pbkdf2_iterations = scalar<int>(n["pbkdf2_iterations"], "security.pbkdf2_iterations");
      if (c.pbkdf2_iterations < 1000) invalid("security.pbkdf2_iterations must be at least 1000");
    }
  }
  return c;
}

ServiceConfig load_config(const std::filesystem::path& path, const EnvLookup& env) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "config: cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path(), env);
}

ingest::PromptRegistry load_prompts(const ServiceConfig& config) {
  return config.prompts_path ? ingest::PromptRegistry::from_file(*config.prompts_path)
                             : ingest::PromptRegistry::embedded();
}

ingest::IngestConfig make_ingest_config(const ServiceConfig& config, const ingest::PromptRegistry& prompts) {
  ingest::IngestConfig cfg;
  cfg.chunk = config.chunk ? *config.chunk : prompts.chunk_config();
  cfg.retry = config.retry;
  cfg.model_id = config.llm.model_id;
  cfg.snippet_chars = prompts.identification_snippet_chars();
  return cfg;
}

std::unique_ptr<ingest::LlmClient> make_llm_client(const ServiceConfig& config,
                                                   std::shared_ptr<ingest::HttpTransport> transport,
                                                   const EnvLookup& env) {
  if (config.llm.mode == LlmMode::Replay) {
    return std::make_unique<ingest::ReplayLlmClient>(ingest::ReplayLlmClient::from_file(config.llm.replay_fixture));
  }
  const auto key = env(config.llm.api_key_env);
  if (!key) throw Error(ErrorCode::InvalidConfig, "environment variable " + config.llm.api_key_env + " is not set");
  if (!transport) transport = std::make_shared<ingest::HttplibTransport>(config.llm.timeout);
  return std::make_unique<ingest::HttpLlmClient>(ingest::HttpLlmSettings{config.llm.endpoint, *key}, std::move(transport));
}

}  // namespace certkg::service
