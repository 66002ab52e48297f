#pragma once

#include "certkg/error.hpp"
#include "certkg/governance/accounts.hpp"
#include "certkg/ingest/llm.hpp"
#include "certkg/ingest/pipeline.hpp"
#include "certkg/ingest/prompts.hpp"
#include "certkg/service/config.hpp"
#include "certkg/store/graph_store.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace certkg::service {

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // keys lower-case
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// One HTTP status per error code; the machine code is error_code_name().
int http_status(ErrorCode code);
ApiResponse error_response(const Error& e);

struct ServiceOptions {
  std::shared_ptr<ingest::HttpTransport> transport;  // live mode; default cpp-httplib
  std::shared_ptr<ingest::LlmClient> llm;            // overrides the configured client
  Clock clock = system_clock();
  bool synchronous_ingest = false;  // POST /documents finishes before answering
};

struct IngestJob {
  std::string status = "running";  // running | done | failed
  ingest::IngestProgress progress;
  std::optional<std::string> error_code;
  std::string error_message;
};

// Transport-independent router. Every route resolves the bearer session and
// checks the role before reading the body or touching any module.
class Service {
 public:
  Service(ServiceConfig config, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  ApiResponse handle(const ApiRequest& request);

  store::GraphStore& store() { return *store_; }
  governance::AccountStore& accounts() { return *accounts_; }
  const ingest::PromptRegistry& prompts() const { return prompts_; }
  const ServiceConfig& config() const { return config_; }
  ingest::IngestConfig ingest_config() const;

  ingest::LlmClient& llm() { return *llm_; }

  // Runs on a worker thread unless synchronous_ingest is set.
  void start_ingest(const std::string& document_id, const ingest::IngestConfig& cfg, const std::string& actor);
  void wait_for_jobs();
  std::optional<IngestJob> job(const std::string& document_id) const;

 private:
  ServiceConfig config_;
  ServiceOptions options_;
  ingest::PromptRegistry prompts_;
  std::unique_ptr<store::GraphStore> store_;
  std::unique_ptr<governance::AccountStore> accounts_;
  std::shared_ptr<ingest::LlmClient> llm_;

  mutable std::mutex jobs_mutex_;
  std::map<std::string, IngestJob> jobs_;
  std::vector<std::thread> workers_;
};

// Every (method, path template, required permission) the router serves; the
// permission is empty for the public auth routes.
struct RouteInfo {
  std::string method;
  std::string path;
  std::optional<std::string> permission;
};
std::vector<RouteInfo> route_table();

}  // namespace certkg::service
