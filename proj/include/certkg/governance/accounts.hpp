#pragma once

#include "certkg/clock.hpp"
#include "certkg/governance/roles.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace certkg::governance {

struct Account {
  std::string id;
  std::string username;
  std::string password_hash;  // pbkdf2-sha256$<iterations>$<salt hex>$<hash hex>
  Role role = Role::Guest;
  bool active = true;
  std::string created_at;
};

// Public view: never includes the password hash.
nlohmann::json account_summary(const Account& a);

struct Session {
  std::string token;
  std::string account_id;  // empty for guest sessions
  Actor actor;
  TimePoint expires_at;
};

struct ResetToken {
  std::string token;
  std::string account_id;
  TimePoint expires_at;
  bool used = false;
  bool revoked = false;
};

std::string hash_password(const std::string& password, int iterations);
bool verify_password(const std::string& password, const std::string& stored);

// Accounts persist to their own JSON file (empty path: memory only); sessions
// and reset tokens live in memory and die with the process.
class AccountStore {
 public:
  struct Options {
    std::filesystem::path path;
    int pbkdf2_iterations = 210000;
    std::chrono::seconds session_ttl = std::chrono::hours(24);
    std::chrono::seconds reset_token_ttl = std::chrono::hours(1);
    Clock clock = system_clock();
  };

  explicit AccountStore(Options options);

  Account create_account(const std::string& username, const std::string& password, Role role);
  Account deactivate(const std::string& account_id);
  Account get(const std::string& account_id) const;
  std::vector<Account> accounts() const;
  bool empty() const;

  // Every failure is InvalidCredentials, whatever the cause.
  Session authenticate(const std::string& username, const std::string& password);
  Session guest_session();
  // Unauthenticated for unknown tokens, SessionExpired past the TTL or after
  // the account was deactivated.
  Session resolve(const std::string& token) const;
  void logout(const std::string& token);

  ResetToken issue_reset_token(const std::string& account_id);
  void revoke_reset_token(const std::string& token);
  // Single use; InvalidToken when unknown, used, revoked, or expired.
  Account redeem_reset_token(const std::string& token, const std::string& new_password);

 private:
  void persist() const;
  Account& find_mutable(const std::string& account_id);

  Options options_;
  mutable std::mutex mutex_;
  std::vector<Account> accounts_;
  std::map<std::string, Session> sessions_;
  std::map<std::string, ResetToken> reset_tokens_;
  std::uint64_t next_id_ = 0;
};

}  // namespace certkg::governance
