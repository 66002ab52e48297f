#pragma once

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace certkg {

// Every failure surfaced by the library carries one of these codes. The
// service layer maps each code to exactly one HTTP status and machine string.
enum class ErrorCode {
  EmptyName,
  EmptyField,
  UnknownGraph,
  UnknownDocument,
  UnknownEntity,
  UnknownAccount,
  NotFound,
  DuplicateGraph,
  CertifiedImmutable,
  DocumentCertified,
  AlreadyDeleted,
  NotDeleted,
  WrongState,
  NotReady,
  InvalidConfig,
  InvalidArgument,
  MissingPrompt,
  LlmUnavailable,
  ReplayMiss,
  SchemaViolation,
  EmptyDocument,
  Unauthenticated,
  Unauthorized,
  SessionExpired,
  InvalidCredentials,
  InvalidToken,
  DuplicateUsername,
  ChainBroken,
  NeedTwoGraphs,
  PlanConflict,
  NoEntityMatch,
  TooFewEntities,
  Io,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, nlohmann::json detail = nullptr)
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  nlohmann::json detail_;
};

}  // namespace certkg
