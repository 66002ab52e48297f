#include "certkg/store/event_log.hpp"

#include "certkg/digest.hpp"
#include "certkg/error.hpp"

#include <unistd.h>

#include <fstream>

namespace certkg::store {
namespace {

std::string digest_of(const nlohmann::json& body_without_digest) {
  return sha256_hex(canonical_dump(body_without_digest));
}

}  // namespace

const std::string& genesis_digest() {
  static const std::string kGenesis(64, '0');
  return kGenesis;
}

std::string canonical_dump(const nlohmann::json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

nlohmann::json event_to_json(const Event& e) {
  nlohmann::json j{{"v", kEventSchemaVersion},
                   {"seq", e.seq},
                   {"type", e.type},
                   {"actor", e.actor},
                   {"ts", e.ts},
                   {"ref", e.ref},
                   {"payload", e.payload},
                   {"payload_digest", e.payload_digest},
                   {"prev", e.prev_digest}};
  if (!e.digest.empty()) j["digest"] = e.digest;
  return j;
}

Event event_from_json(const nlohmann::json& j) {
  Event e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.type = j.at("type").get<std::string>();
  e.actor = j.at("actor").get<std::string>();
  e.ts = j.at("ts").get<std::string>();
  e.ref = j.at("ref").get<std::string>();
  e.payload = j.at("payload");
  e.payload_digest = j.at("payload_digest").get<std::string>();
  e.prev_digest = j.at("prev").get<std::string>();
  e.digest = j.at("digest").get<std::string>();
  return e;
}

AuditEntry to_audit_entry(const Event& e) {
  return AuditEntry{e.seq,           e.actor,       e.type,   e.ref,
                    e.payload_digest, e.prev_digest, e.digest, e.ts};
}

void to_json(nlohmann::json& j, const AuditEntry& a) {
  j = nlohmann::json{{"seq", a.seq},
                     {"actor", a.actor},
                     {"action", a.action},
                     {"subject_ref", a.subject_ref},
                     {"payload_digest", a.payload_digest},
                     {"prev_digest", a.prev_digest},
                     {"digest", a.digest},
                     {"created_at", a.created_at}};
}

EventLog::EventLog(std::filesystem::path path, Clock clock)
    : path_(std::move(path)), clock_(std::move(clock)) {
  if (path_.empty()) return;
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto parsed = nlohmann::json::parse(line, nullptr, false);
      if (parsed.is_discarded() || !parsed.is_object()) {
        throw Error(ErrorCode::ChainBroken,
                    "unreadable event log line " + std::to_string(events_.size()));
      }
      try {
        events_.push_back(event_from_json(parsed));
      } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::ChainBroken, std::string("malformed event: ") + ex.what());
      }
    }
  } else if (path_.has_parent_path()) {
    std::filesystem::create_directories(path_.parent_path());
  }
  file_ = std::fopen(path_.c_str(), "ab");
  if (file_ == nullptr) throw Error(ErrorCode::Io, "cannot open event log " + path_.string());
}

EventLog::~EventLog() {
  if (file_ != nullptr) std::fclose(file_);
}

std::string EventLog::now() const { return format_timestamp(clock_()); }

const Event& EventLog::append(std::string type, std::string actor, std::string ref,
                              nlohmann::json payload, bool sync) {
  if (events_.empty() && type != kHeaderEventType) {
    append(std::string(kHeaderEventType), "system", "",
           nlohmann::json{{"digest_alg", kDigestAlgorithm}, {"v", kEventSchemaVersion}});
  }
  Event e;
  e.seq = events_.size();
  e.type = std::move(type);
  e.actor = std::move(actor);
  e.ts = now();
  e.ref = std::move(ref);
  // Round-trip through the canonical form so in-memory state matches what a
  // replay from disk would see (invalid UTF-8 replaced, numbers normalized).
  e.payload = nlohmann::json::parse(canonical_dump(payload));
  e.payload_digest = sha256_hex(canonical_dump(e.payload));
  e.prev_digest = events_.empty() ? genesis_digest() : events_.back().digest;
  e.digest = digest_of(event_to_json(e));
  const std::string line = canonical_dump(event_to_json(e));

  if (file_ != nullptr) {
    if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() ||
        std::fputc('\n', file_) == EOF || std::fflush(file_) != 0) {
      throw Error(ErrorCode::Io, "event log write failed");
    }
    if (sync) ::fsync(::fileno(file_));
  } else {
    memory_lines_.push_back(line);
  }
  events_.push_back(std::move(e));
  return events_.back();
}

std::vector<std::string> EventLog::lines() const {
  if (path_.empty()) return memory_lines_;
  std::vector<std::string> out;
  std::ifstream in(path_, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

ChainVerification EventLog::verify_lines(const std::vector<std::string>& lines) {
  ChainVerification result;
  std::string prev = genesis_digest();
  std::uint64_t seq = 0;
  auto fail = [&](std::string reason) {
    result.ok = false;
    result.first_bad_seq = seq;
    result.reason = std::move(reason);
    return result;
  };
  for (const auto& line : lines) {
    auto parsed = nlohmann::json::parse(line, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object()) return fail("unparseable line");
    if (canonical_dump(parsed) != line) return fail("non-canonical encoding");
    Event e;
    try {
      e = event_from_json(parsed);
    } catch (const nlohmann::json::exception&) {
      return fail("missing fields");
    }
    if (parsed.value("v", 0) != kEventSchemaVersion) return fail("schema version");
    if (e.seq != seq) return fail("sequence gap");
    if (e.prev_digest != prev) return fail("prev digest mismatch");
    if (e.payload_digest != sha256_hex(canonical_dump(e.payload))) {
      return fail("payload digest mismatch");
    }
    auto body = parsed;
    body.erase("digest");
    if (digest_of(body) != e.digest) return fail("entry digest mismatch");
    if (seq == 0 && (e.type != kHeaderEventType ||
                     e.payload.value("digest_alg", "") != kDigestAlgorithm)) {
      return fail("bad header");
    }
    prev = e.digest;
    ++seq;
  }
  result.entries = seq;
  return result;
}

ChainVerification EventLog::verify_file(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  std::ifstream in(path, std::ios::binary);
  if (!in && std::filesystem::exists(path)) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return verify_lines(lines);
}

}  // namespace certkg::store
