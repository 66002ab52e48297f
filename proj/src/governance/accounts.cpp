#include "certkg/governance/accounts.hpp"

#include "certkg/digest.hpp"
#include "certkg/error.hpp"
#include "certkg/text.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>

#include <fstream>
#include <sstream>

namespace certkg::governance {

using nlohmann::json;

namespace {

std::string to_hex(const unsigned char* data, std::size_t n) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0xF]);
  }
  return out;
}

std::string pbkdf2(const std::string& password, const std::string& salt_hex, int iterations) {
  unsigned char out[32];
  if (PKCS5_PBKDF2_HMAC(password.data(), static_cast<int>(password.size()),
                        reinterpret_cast<const unsigned char*>(salt_hex.data()), static_cast<int>(salt_hex.size()),
                        iterations, EVP_sha256(), sizeof(out), out) != 1) {
    throw Error(ErrorCode::Io, "PBKDF2 failed");
  }
  return to_hex(out, sizeof(out));
}

json account_to_json(const Account& a) {
  return json{{"id", a.id},         {"username", a.username}, {"password_hash", a.password_hash},
              {"role", to_string(a.role)}, {"active", a.active}, {"created_at", a.created_at}};
}

}  // namespace

json account_summary(const Account& a) {
  return json{{"id", a.id},
              {"username", a.username},
              {"role", to_string(a.role)},
              {"active", a.active},
              {"created_at", a.created_at}};
}

std::string hash_password(const std::string& password, int iterations) {
  const std::string salt = random_hex(16);
  return "pbkdf2-sha256$" + std::to_string(iterations) + "$" + salt + "$" + pbkdf2(password, salt, iterations);
}

bool verify_password(const std::string& password, const std::string& stored) {
  std::vector<std::string> parts;
  std::stringstream ss(stored);
  for (std::string part; std::getline(ss, part, '$');) parts.push_back(part);
  if (parts.size() != 4 || parts[0] != "pbkdf2-sha256") return false;
  int iterations = 0;
  try {
    iterations = std::stoi(parts[1]);
  } catch (const std::exception&) {
    return false;
  }
  if (iterations <= 0) return false;
  const std::string computed = pbkdf2(password, parts[2], iterations);
  return computed.size() == parts[3].size() &&
         CRYPTO_memcmp(computed.data(), parts[3].data(), computed.size()) == 0;
}

AccountStore::AccountStore(Options options) : options_(std::move(options)) {
  if (options_.path.empty() || !std::filesystem::exists(options_.path)) return;
  std::ifstream in(options_.path);
  try {
    const json j = json::parse(in);
    for (const auto& a : j.at("accounts")) {
      Account acc;
      acc.id = a.at("id").get<std::string>();
      acc.username = a.at("username").get<std::string>();
      acc.password_hash = a.at("password_hash").get<std::string>();
      acc.role = parse_role(a.at("role").get<std::string>()).value_or(Role::Guest);
      acc.active = a.at("active").get<bool>();
      acc.created_at = a.value("created_at", "");
      accounts_.push_back(std::move(acc));
    }
    next_id_ = j.value("next_id", static_cast<std::uint64_t>(accounts_.size()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, "accounts file " + options_.path.string() + ": " + e.what());
  }
}

void AccountStore::persist() const {
  if (options_.path.empty()) return;
  json arr = json::array();
  for (const auto& a : accounts_) arr.push_back(account_to_json(a));
  const json doc{{"accounts", arr}, {"next_id", next_id_}};
  const auto tmp = options_.path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << doc.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp);
  }
  std::filesystem::rename(tmp, options_.path);
}

Account& AccountStore::find_mutable(const std::string& account_id) {
  for (auto& a : accounts_) {
    if (a.id == account_id) return a;
  }
  throw Error(ErrorCode::UnknownAccount, "unknown account: " + account_id);
}

Account AccountStore::create_account(const std::string& username, const std::string& password, Role role) {
  const std::string name = text::trim(username);
  if (name.empty()) throw Error(ErrorCode::InvalidArgument, "username must be non-empty");
  if (password.empty()) throw Error(ErrorCode::InvalidArgument, "password must be non-empty");
  std::lock_guard lock(mutex_);
  for (const auto& a : accounts_) {
    if (a.username == name) throw Error(ErrorCode::DuplicateUsername, "username taken: " + name);
  }
  Account a;
  a.id = "a" + std::to_string(++next_id_);
  a.username = name;
  a.password_hash = hash_password(password, options_.pbkdf2_iterations);
  a.role = role;
  a.created_at = format_timestamp(options_.clock());
  accounts_.push_back(a);
  persist();
  return a;
}

Account AccountStore::deactivate(const std::string& account_id) {
  std::lock_guard lock(mutex_);
  Account& a = find_mutable(account_id);
  a.active = false;
  std::erase_if(sessions_, [&](const auto& kv) { return kv.second.account_id == account_id; });
  persist();
  return a;
}

Account AccountStore::get(const std::string& account_id) const {
  std::lock_guard lock(mutex_);
  for (const auto& a : accounts_) {
    if (a.id == account_id) return a;
  }
  throw Error(ErrorCode::UnknownAccount, "unknown account: " + account_id);
}

std::vector<Account> AccountStore::accounts() const {
  std::lock_guard lock(mutex_);
  return accounts_;
}

bool AccountStore::empty() const {
  std::lock_guard lock(mutex_);
  return accounts_.empty();
}

Session AccountStore::authenticate(const std::string& username, const std::string& password) {
  std::lock_guard lock(mutex_);
  const Account* match = nullptr;
  for (const auto& a : accounts_) {
    if (a.username == username) match = &a;
  }
  if (match == nullptr || !match->active || !verify_password(password, match->password_hash)) {
    throw Error(ErrorCode::InvalidCredentials, "invalid credentials");
  }
  Session s{random_hex(32), match->id, Actor{match->username, match->role},
            options_.clock() + options_.session_ttl};
  sessions_[s.token] = s;
  return s;
}

Session AccountStore::guest_session() {
  std::lock_guard lock(mutex_);
  Session s{random_hex(32), "", Actor{"guest", Role::Guest}, options_.clock() + options_.session_ttl};
  sessions_[s.token] = s;
  return s;
}

Session AccountStore::resolve(const std::string& token) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(token);
  if (it == sessions_.end()) throw Error(ErrorCode::Unauthenticated, "missing or unknown session token");
  if (options_.clock() >= it->second.expires_at) throw Error(ErrorCode::SessionExpired, "session expired");
  return it->second;
}

void AccountStore::logout(const std::string& token) {
  std::lock_guard lock(mutex_);
  sessions_.erase(token);
}

ResetToken AccountStore::issue_reset_token(const std::string& account_id) {
  std::lock_guard lock(mutex_);
  find_mutable(account_id);
  ResetToken t{random_hex(32), account_id, options_.clock() + options_.reset_token_ttl};
  reset_tokens_[t.token] = t;
  return t;
}

void AccountStore::revoke_reset_token(const std::string& token) {
  std::lock_guard lock(mutex_);
  auto it = reset_tokens_.find(token);
  if (it == reset_tokens_.end()) throw Error(ErrorCode::InvalidToken, "unknown reset token");
  it->second.revoked = true;
}

Account AccountStore::redeem_reset_token(const std::string& token, const std::string& new_password) {
  if (new_password.empty()) throw Error(ErrorCode::InvalidArgument, "password must be non-empty");
  std::lock_guard lock(mutex_);
  auto it = reset_tokens_.find(token);
  if (it == reset_tokens_.end() || it->second.used || it->second.revoked ||
      options_.clock() >= it->second.expires_at) {
    throw Error(ErrorCode::InvalidToken, "reset token is invalid, used, revoked, or expired");
  }
  it->second.used = true;
  Account& a = find_mutable(it->second.account_id);
  a.password_hash = hash_password(new_password, options_.pbkdf2_iterations);
  std::erase_if(sessions_, [&](const auto& kv) { return kv.second.account_id == a.id; });
  persist();
  return a;
}

}  // namespace certkg::governance
