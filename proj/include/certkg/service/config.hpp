#pragma once

#include "certkg/governance/review.hpp"
#include "certkg/ingest/chunker.hpp"
#include "certkg/ingest/llm.hpp"
#include "certkg/ingest/pipeline.hpp"
#include "certkg/ingest/prompts.hpp"

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace certkg::service {

enum class LlmMode { Live, Replay };

struct LlmSettings {
  LlmMode mode = LlmMode::Replay;
  std::string model_id = "default";
  std::string endpoint;           // live
  std::string api_key_env;        // live: name of the variable holding the key
  std::filesystem::path replay_fixture;  // replay
  std::chrono::seconds timeout{120};
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "data";
  std::optional<std::filesystem::path> prompts_path;  // embedded registry when absent
  LlmSettings llm;
  governance::GovernanceConfig governance;
  std::size_t edge_cap = 500;
  std::chrono::seconds session_ttl = std::chrono::hours(24);
  std::chrono::seconds reset_token_ttl = std::chrono::hours(1);
  int pbkdf2_iterations = 210000;
  std::optional<ingest::ChunkConfig> chunk;  // registry settings when absent
  ingest::RetryPolicy retry;

  std::filesystem::path log_path() const { return data_dir / "events.jsonl"; }
  std::filesystem::path snapshot_path() const { return data_dir / "snapshot.json"; }
  std::filesystem::path accounts_path() const { return data_dir / "accounts.json"; }
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

// Relative paths resolve against the config file's directory. InvalidConfig
// on unknown keys, bad values, or a live mode without its key variable set.
ServiceConfig load_config(const std::filesystem::path& path, const EnvLookup& env = process_env());
ServiceConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir,
                           const EnvLookup& env = process_env());

ingest::PromptRegistry load_prompts(const ServiceConfig& config);
// Chunking falls back to the prompt registry's settings when the config has none.
ingest::IngestConfig make_ingest_config(const ServiceConfig& config, const ingest::PromptRegistry& prompts);

// Replay mode never touches `transport`; live mode sends every call through it.
std::unique_ptr<ingest::LlmClient> make_llm_client(const ServiceConfig& config,
                                                   std::shared_ptr<ingest::HttpTransport> transport,
                                                   const EnvLookup& env = process_env());

}  // namespace certkg::service
