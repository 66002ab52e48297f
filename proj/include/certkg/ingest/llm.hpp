#pragma once

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace certkg::ingest {

struct LlmRequest {
  std::string model_id;
  std::string system;
  std::string user;
  double temperature = 0.0;
};

nlohmann::json to_json(const LlmRequest& r);

// SHA-256 of the canonical JSON of the request; the replay fixture key.
std::string request_digest(const LlmRequest& r);

struct LlmResponse {
  std::string text;
};

// Implementations throw Error(LlmUnavailable) on transport failure.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual LlmResponse complete(const LlmRequest& request) = 0;
};

struct HttpResult {
  int status = 0;  // 0: no response (connection failure)
  std::string body;
  std::string error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResult post(const std::string& url, const std::map<std::string, std::string>& headers,
                          const std::string& body) = 0;
};

// cpp-httplib client; https URLs go through OpenSSL.
class HttplibTransport : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::seconds timeout = std::chrono::seconds(120));
  HttpResult post(const std::string& url, const std::map<std::string, std::string>& headers,
                  const std::string& body) override;

 private:
  std::chrono::seconds timeout_;
};

// Counts calls and forwards to `inner` (or fails them when there is none).
class CountingTransport : public HttpTransport {
 public:
  explicit CountingTransport(std::shared_ptr<HttpTransport> inner = nullptr) : inner_(std::move(inner)) {}
  HttpResult post(const std::string& url, const std::map<std::string, std::string>& headers,
                  const std::string& body) override;
  std::size_t calls() const { return calls_; }

 private:
  std::shared_ptr<HttpTransport> inner_;
  std::atomic<std::size_t> calls_{0};
};

struct HttpLlmSettings {
  std::string endpoint;  // base URL of an OpenAI-compatible API, e.g. https://host/v1
  std::string api_key;
};

// POSTs {endpoint}/chat/completions and returns choices[0].message.content.
class HttpLlmClient : public LlmClient {
 public:
  HttpLlmClient(HttpLlmSettings settings, std::shared_ptr<HttpTransport> transport);
  LlmResponse complete(const LlmRequest& request) override;

 private:
  HttpLlmSettings settings_;
  std::shared_ptr<HttpTransport> transport_;
};

// Serves recorded responses keyed by request digest. Several records under one
// digest are served in order and the last one repeats. A record with an
// "error" field replays a transport failure. Unknown digests throw ReplayMiss.
class ReplayLlmClient : public LlmClient {
 public:
  static ReplayLlmClient from_file(const std::filesystem::path& path);
  static ReplayLlmClient from_lines(const std::vector<std::string>& lines);

  LlmResponse complete(const LlmRequest& request) override;
  std::size_t served() const { return served_; }

 private:
  struct Record {
    std::optional<std::string> text;
    std::optional<std::string> error;
  };
  std::map<std::string, std::vector<Record>> records_;
  std::map<std::string, std::size_t> cursor_;
  std::size_t served_ = 0;
  std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
};

// Returns scripted outcomes in call order; used to author fixtures and in tests.
class ScriptedLlmClient : public LlmClient {
 public:
  struct Step {
    std::string text;
    bool fail = false;
  };
  explicit ScriptedLlmClient(std::vector<Step> steps) : steps_(std::move(steps)) {}
  LlmResponse complete(const LlmRequest& request) override;
  const std::vector<LlmRequest>& requests() const { return requests_; }
  std::size_t remaining() const { return steps_.size() - next_; }

 private:
  std::vector<Step> steps_;
  std::size_t next_ = 0;
  std::vector<LlmRequest> requests_;
  std::mutex mutex_;
};

// Proxies to `inner` and appends one replay record per call, failures included.
class RecordingLlmClient : public LlmClient {
 public:
  RecordingLlmClient(LlmClient& inner, const std::filesystem::path& path);
  ~RecordingLlmClient() override;
  LlmResponse complete(const LlmRequest& request) override;

 private:
  LlmClient& inner_;
  std::FILE* file_ = nullptr;
  std::mutex mutex_;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{200};  // doubles after every failure
};

// Retries LlmUnavailable only; other errors propagate at once.
LlmResponse complete_with_retry(LlmClient& client, const LlmRequest& request, const RetryPolicy& policy);

}  // namespace certkg::ingest
