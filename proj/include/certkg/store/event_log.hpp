#pragma once

#include "certkg/clock.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace certkg::store {

inline constexpr int kEventSchemaVersion = 1;
inline constexpr std::string_view kHeaderEventType = "log.header";

// 64 hex zeros; the prev digest of entry 0.
const std::string& genesis_digest();

struct Event {
  std::uint64_t seq = 0;
  std::string type;
  std::string actor;
  std::string ts;
  std::string ref;  // entity/triple/document id the event is about
  nlohmann::json payload;
  std::string payload_digest;
  std::string prev_digest;
  std::string digest;
};

// Public audit view of one event.
struct AuditEntry {
  std::uint64_t seq = 0;
  std::string actor;
  std::string action;
  std::string subject_ref;
  std::string payload_digest;
  std::string prev_digest;
  std::string digest;
  std::string created_at;
};

AuditEntry to_audit_entry(const Event& e);
void to_json(nlohmann::json& j, const AuditEntry& a);

struct ChainVerification {
  bool ok = true;
  std::optional<std::uint64_t> first_bad_seq;
  std::size_t entries = 0;
  std::string reason;
};

// Append-only, hash-chained JSONL file. Each line is the canonical (sorted-key,
// compact) JSON of one Event; `digest` covers every other field, including
// `prev`, so altering any byte of any line breaks verification at that line.
// Entry 0 is a header event naming the digest algorithm.
class EventLog {
 public:
  // Empty path keeps the log in memory only.
  EventLog(std::filesystem::path path, Clock clock);
  ~EventLog();
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  // Events already on disk, header included. Throws ChainBroken on lines that
  // do not parse; digests are not checked here (see verify()).
  const std::vector<Event>& events() const { return events_; }

  const Event& append(std::string type, std::string actor, std::string ref, nlohmann::json payload,
                      bool sync = false);

  std::string now() const;
  const std::filesystem::path& path() const { return path_; }
  std::vector<std::string> lines() const;

  static ChainVerification verify_lines(const std::vector<std::string>& lines);
  static ChainVerification verify_file(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  Clock clock_;
  std::FILE* file_ = nullptr;
  std::vector<Event> events_;
  std::vector<std::string> memory_lines_;
};

std::string canonical_dump(const nlohmann::json& j);
nlohmann::json event_to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);

}  // namespace certkg::store
