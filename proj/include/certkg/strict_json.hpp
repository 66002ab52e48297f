#pragma once

#include <nlohmann/json.hpp>

#include <initializer_list>
#include <set>
#include <string>
#include <string_view>

namespace certkg {

// Validating reader for model output that must match a fixed schema exactly.
// Every failure throws Error(SchemaViolation) whose detail carries the raw
// payload byte for byte under "raw" and a description under "problem".
class StrictReader {
 public:
  // Surrounding whitespace is tolerated; anything else around the object is not.
  explicit StrictReader(std::string_view raw);

  const nlohmann::json& root() const { return root_; }

  void exact_keys(const nlohmann::json& obj, std::initializer_list<const char*> keys,
                  const std::string& where) const;
  const nlohmann::json& object(const nlohmann::json& obj, const char* key, const std::string& where) const;
  const nlohmann::json& array(const nlohmann::json& obj, const char* key, const std::string& where) const;
  std::string string(const nlohmann::json& obj, const char* key, const std::string& where) const;
  std::string one_of(const nlohmann::json& obj, const char* key, const std::set<std::string>& allowed,
                     const std::string& where) const;
  double number_in(const nlohmann::json& obj, const char* key, double lo, double hi,
                   const std::string& where) const;
  const nlohmann::json& element_object(const nlohmann::json& value, const std::string& where) const;
  std::string element_string(const nlohmann::json& value, const std::string& where) const;

  [[noreturn]] void fail(const std::string& problem) const;

 private:
  std::string raw_;
  nlohmann::json root_;
};

}  // namespace certkg
