#include "certkg/governance/roles.hpp"

#include "certkg/error.hpp"

namespace certkg::governance {

std::string_view to_string(Role r) {
  switch (r) {
    case Role::Guest: return "guest";
    case Role::Expert: return "expert";
    case Role::MetaExpert: return "meta_expert";
    case Role::Admin: return "admin";
  }
  return "guest";
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Read: return "read";
    case Action::RunTask: return "run_task";
    case Action::Analytics: return "analytics";
    case Action::Export: return "export";
    case Action::Ingest: return "ingest";
    case Action::TripleWrite: return "triple_write";
    case Action::Judge: return "judge";
    case Action::RunVerifier: return "run_verifier";
    case Action::FusionMerge: return "fusion_merge";
    case Action::Finalize: return "finalize";
    case Action::Certify: return "certify";
    case Action::AuditRead: return "audit_read";
    case Action::ManageAccounts: return "manage_accounts";
    case Action::ManageResetTokens: return "manage_reset_tokens";
  }
  return "read";
}

std::optional<Role> parse_role(std::string_view s) {
  for (Role r : all_roles()) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

const std::vector<Role>& all_roles() {
  static const std::vector<Role> roles{Role::Guest, Role::Expert, Role::MetaExpert, Role::Admin};
  return roles;
}

const std::vector<Action>& all_actions() {
  static const std::vector<Action> actions{
      Action::Read,        Action::RunTask,  Action::Analytics,   Action::Export,
      Action::Ingest,      Action::TripleWrite, Action::Judge,    Action::RunVerifier,
      Action::FusionMerge, Action::Finalize, Action::Certify,     Action::AuditRead,
      Action::ManageAccounts, Action::ManageResetTokens};
  return actions;
}

bool allowed(Role role, Action action) {
  const bool reader = action == Action::Read || action == Action::RunTask || action == Action::Analytics ||
                      action == Action::Export;
  const bool curation = action == Action::Ingest || action == Action::TripleWrite || action == Action::Judge ||
                        action == Action::RunVerifier || action == Action::FusionMerge;
  const bool release = action == Action::Finalize || action == Action::Certify;
  const bool admin = action == Action::ManageAccounts || action == Action::ManageResetTokens;
  switch (role) {
    case Role::Guest: return reader;
    case Role::Expert: return reader || curation || action == Action::AuditRead;
    case Role::MetaExpert: return reader || curation || release || action == Action::AuditRead;
    // Separation of duties: administrators see everything but change no graph.
    case Role::Admin: return reader || admin || action == Action::AuditRead;
  }
  return false;
}

void require(const Actor& actor, Action action) {
  if (!allowed(actor.role, action)) {
    throw Error(ErrorCode::Unauthorized,
                std::string(to_string(actor.role)) + " may not " + std::string(to_string(action)),
                {{"role", to_string(actor.role)}, {"action", to_string(action)}});
  }
}

}  // namespace certkg::governance
