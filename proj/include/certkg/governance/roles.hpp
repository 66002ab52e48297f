#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace certkg::governance {

enum class Role { Guest, Expert, MetaExpert, Admin };

enum class Action {
  Read,            // catalog, documents, graph views, evidence, readiness, fusion previews
  RunTask,         // /tasks/*
  Analytics,       // /analytics
  Export,          // non-deleted edge export
  Ingest,
  TripleWrite,     // insert, update, soft delete, restore
  Judge,
  RunVerifier,
  FusionMerge,
  Finalize,
  Certify,
  AuditRead,
  ManageAccounts,
  ManageResetTokens,
};

std::string_view to_string(Role r);
std::string_view to_string(Action a);
std::optional<Role> parse_role(std::string_view s);
const std::vector<Role>& all_roles();
const std::vector<Action>& all_actions();

bool allowed(Role role, Action action);

struct Actor {
  std::string id;  // username, "guest", or a tool identity such as "cli"
  Role role = Role::Guest;
};

// Throws Unauthorized when the role lacks `action`.
void require(const Actor& actor, Action action);

}  // namespace certkg::governance
