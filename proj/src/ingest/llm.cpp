#include "certkg/ingest/llm.hpp"

#include "certkg/digest.hpp"
#include "certkg/error.hpp"
#include "certkg/store/event_log.hpp"

#include <httplib.h>

#include <fstream>
#include <thread>

namespace certkg::ingest {

using nlohmann::json;

json to_json(const LlmRequest& r) {
  return json{{"model_id", r.model_id}, {"system", r.system}, {"user", r.user}, {"temperature", r.temperature}};
}

std::string request_digest(const LlmRequest& r) { return sha256_hex(store::canonical_dump(to_json(r))); }

// ---------------------------------------------------------------- transports

HttplibTransport::HttplibTransport(std::chrono::seconds timeout) : timeout_(timeout) {}

HttpResult HttplibTransport::post(const std::string& url, const std::map<std::string, std::string>& headers,
                                  const std::string& body) {
  // Split "scheme://host[:port]" from the path.
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return {0, "", "malformed url: " + url};
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  auto res = client.Post(path, h, body, "application/json");
  if (!res) return {0, "", httplib::to_string(res.error())};
  return {res->status, res->body, ""};
}

HttpResult CountingTransport::post(const std::string& url, const std::map<std::string, std::string>& headers,
                                   const std::string& body) {
  ++calls_;
  if (inner_) return inner_->post(url, headers, body);
  return {0, "", "no transport configured"};
}

// ---------------------------------------------------------------- http client

HttpLlmClient::HttpLlmClient(HttpLlmSettings settings, std::shared_ptr<HttpTransport> transport)
    : settings_(std::move(settings)), transport_(std::move(transport)) {}

LlmResponse HttpLlmClient::complete(const LlmRequest& request) {
  json messages = json::array();
  if (!request.system.empty()) messages.push_back({{"role", "system"}, {"content", request.system}});
  messages.push_back({{"role", "user"}, {"content", request.user}});
  const json body{{"model", request.model_id}, {"messages", messages}, {"temperature", request.temperature}};

  std::string url = settings_.endpoint;
  while (!url.empty() && url.back() == '/') url.pop_back();
  url += "/chat/completions";
  std::map<std::string, std::string> headers{{"Accept", "application/json"}};
  if (!settings_.api_key.empty()) headers["Authorization"] = "Bearer " + settings_.api_key;

  const HttpResult r = transport_->post(url, headers, body.dump());
  if (r.status == 0) throw Error(ErrorCode::LlmUnavailable, "llm transport failed: " + r.error);
  if (r.status < 200 || r.status >= 300) {
    throw Error(ErrorCode::LlmUnavailable, "llm endpoint returned HTTP " + std::to_string(r.status),
                {{"status", r.status}, {"body", r.body}});
  }
  try {
    const json parsed = json::parse(r.body);
    return LlmResponse{parsed.at("choices").at(0).at("message").at("content").get<std::string>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::LlmUnavailable, std::string("unexpected llm response shape: ") + e.what(),
                {{"body", r.body}});
  }
}

// ---------------------------------------------------------------- replay

ReplayLlmClient ReplayLlmClient::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read replay fixture " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return from_lines(lines);
}

ReplayLlmClient ReplayLlmClient::from_lines(const std::vector<std::string>& lines) {
  ReplayLlmClient client;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(lines[i]);
      Record r;
      if (j.contains("response_text")) r.text = j.at("response_text").get<std::string>();
      if (j.contains("error")) r.error = j.at("error").get<std::string>();
      if (!r.text && !r.error) throw std::invalid_argument("no response_text or error");
      client.records_[j.at("request_digest").get<std::string>()].push_back(std::move(r));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::InvalidConfig,
                  "replay fixture line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return client;
}

LlmResponse ReplayLlmClient::complete(const LlmRequest& request) {
  const std::string digest = request_digest(request);
  std::lock_guard lock(*mutex_);
  auto it = records_.find(digest);
  if (it == records_.end()) {
    throw Error(ErrorCode::ReplayMiss, "no recorded response for request " + digest,
                {{"request_digest", digest}});
  }
  std::size_t& cur = cursor_[digest];
  const Record& r = it->second[std::min(cur, it->second.size() - 1)];
  ++cur;
  ++served_;
  if (r.error) throw Error(ErrorCode::LlmUnavailable, "replayed failure: " + *r.error);
  return LlmResponse{*r.text};
}

// ---------------------------------------------------------------- scripted

LlmResponse ScriptedLlmClient::complete(const LlmRequest& request) {
  std::lock_guard lock(mutex_);
  requests_.push_back(request);
  if (next_ >= steps_.size()) {
    throw Error(ErrorCode::ReplayMiss, "script exhausted after " + std::to_string(steps_.size()) + " responses");
  }
  const Step& s = steps_[next_++];
  if (s.fail) throw Error(ErrorCode::LlmUnavailable, "scripted failure");
  return LlmResponse{s.text};
}

// ---------------------------------------------------------------- recording

RecordingLlmClient::RecordingLlmClient(LlmClient& inner, const std::filesystem::path& path) : inner_(inner) {
  file_ = std::fopen(path.c_str(), "ab");
  if (file_ == nullptr) throw Error(ErrorCode::Io, "cannot open fixture for writing: " + path.string());
}

RecordingLlmClient::~RecordingLlmClient() {
  if (file_ != nullptr) std::fclose(file_);
}

LlmResponse RecordingLlmClient::complete(const LlmRequest& request) {
  json record{{"request_digest", request_digest(request)}};
  std::optional<LlmResponse> response;
  std::optional<Error> failure;
  try {
    response = inner_.complete(request);
    record["response_text"] = response->text;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::LlmUnavailable) throw;
    failure = e;
    record["error"] = e.what();
  }
  {
    std::lock_guard lock(mutex_);
    const std::string line = store::canonical_dump(record) + "\n";
    std::fwrite(line.data(), 1, line.size(), file_);
    std::fflush(file_);
  }
  if (failure) throw *failure;
  return *response;
}

// ---------------------------------------------------------------- retry

LlmResponse complete_with_retry(LlmClient& client, const LlmRequest& request, const RetryPolicy& policy) {
  const int attempts = std::max(1, policy.attempts);
  auto delay = policy.base_delay;
  for (int attempt = 1;; ++attempt) {
    try {
      return client.complete(request);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::LlmUnavailable || attempt >= attempts) throw;
    }
    if (delay.count() > 0) std::this_thread::sleep_for(delay);
    delay *= 2;
  }
}

}  // namespace certkg::ingest
