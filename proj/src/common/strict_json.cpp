#include "certkg/strict_json.hpp"

#include "certkg/error.hpp"

namespace certkg {

using nlohmann::json;

StrictReader::StrictReader(std::string_view raw) : raw_(raw) {
  try {
    root_ = json::parse(raw_);
  } catch (const json::parse_error& e) {
    fail(std::string("not a JSON document: ") + e.what());
  }
  if (!root_.is_object()) fail("top level must be a JSON object");
}

void StrictReader::fail(const std::string& problem) const {
  throw Error(ErrorCode::SchemaViolation, "model output violates the schema: " + problem,
              json{{"raw", raw_}, {"problem", problem}});
}

void StrictReader::exact_keys(const json& obj, std::initializer_list<const char*> keys,
                              const std::string& where) const {
  if (!obj.is_object()) fail(where + " must be an object");
  for (const char* k : keys) {
    if (!obj.contains(k)) fail(where + " is missing \"" + k + "\"");
  }
  for (const auto& [k, v] : obj.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) fail(where + " has unexpected field \"" + k + "\"");
  }
}

const json& StrictReader::object(const json& obj, const char* key, const std::string& where) const {
  const json& v = obj.at(key);
  if (!v.is_object()) fail(where + "." + key + " must be an object");
  return v;
}

const json& StrictReader::array(const json& obj, const char* key, const std::string& where) const {
  const json& v = obj.at(key);
  if (!v.is_array()) fail(where + "." + key + " must be an array");
  return v;
}

std::string StrictReader::string(const json& obj, const char* key, const std::string& where) const {
  const json& v = obj.at(key);
  if (!v.is_string()) fail(where + "." + key + " must be a string");
  return v.get<std::string>();
}

std::string StrictReader::one_of(const json& obj, const char* key, const std::set<std::string>& allowed,
                                 const std::string& where) const {
  std::string v = string(obj, key, where);
  if (!allowed.contains(v)) fail(where + "." + key + " has out-of-enum value \"" + v + "\"");
  return v;
}

double StrictReader::number_in(const json& obj, const char* key, double lo, double hi,
                               const std::string& where) const {
  const json& v = obj.at(key);
  if (!v.is_number()) fail(where + "." + key + " must be a number");
  const double d = v.get<double>();
  if (!(d >= lo && d <= hi)) fail(where + "." + key + " out of range");
  return d;
}

const json& StrictReader::element_object(const json& value, const std::string& where) const {
  if (!value.is_object()) fail(where + " must be an object");
  return value;
}

std::string StrictReader::element_string(const json& value, const std::string& where) const {
  if (!value.is_string()) fail(where + " must be a string");
  return value.get<std::string>();
}

}  // namespace certkg
