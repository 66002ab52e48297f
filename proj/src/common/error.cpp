#include "certkg/error.hpp"

namespace certkg {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyName: return "empty_name";
    case ErrorCode::EmptyField: return "empty_field";
    case ErrorCode::UnknownGraph: return "unknown_graph";
    case ErrorCode::UnknownDocument: return "unknown_document";
    case ErrorCode::UnknownEntity: return "unknown_entity";
    case ErrorCode::UnknownAccount: return "unknown_account";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::DuplicateGraph: return "duplicate_graph";
    case ErrorCode::CertifiedImmutable: return "certified_immutable";
    case ErrorCode::DocumentCertified: return "document_certified";
    case ErrorCode::AlreadyDeleted: return "already_deleted";
    case ErrorCode::NotDeleted: return "not_deleted";
    case ErrorCode::WrongState: return "wrong_state";
    case ErrorCode::NotReady: return "not_ready";
    case ErrorCode::InvalidConfig: return "invalid_config";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::MissingPrompt: return "missing_prompt";
    case ErrorCode::LlmUnavailable: return "llm_unavailable";
    case ErrorCode::ReplayMiss: return "replay_miss";
    case ErrorCode::SchemaViolation: return "schema_violation";
    case ErrorCode::EmptyDocument: return "empty_document";
    case ErrorCode::Unauthenticated: return "unauthenticated";
    case ErrorCode::Unauthorized: return "unauthorized";
    case ErrorCode::SessionExpired: return "session_expired";
    case ErrorCode::InvalidCredentials: return "invalid_credentials";
    case ErrorCode::InvalidToken: return "invalid_token";
    case ErrorCode::DuplicateUsername: return "duplicate_username";
    case ErrorCode::ChainBroken: return "chain_broken";
    case ErrorCode::NeedTwoGraphs: return "need_two_graphs";
    case ErrorCode::PlanConflict: return "plan_conflict";
    case ErrorCode::NoEntityMatch: return "no_entity_match";
    case ErrorCode::TooFewEntities: return "too_few_entities";
    case ErrorCode::Io: return "io_error";
  }
  return "unknown_error";
}

}  // namespace certkg
