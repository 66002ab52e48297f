#pragma once

#include "certkg/ingest/chunker.hpp"
#include "certkg/store/model.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace certkg::ingest {

// Flat view of the prompt YAML: nested mappings become dotted keys
// ("extraction.tcfd", "analysis.presets.executive").
class PromptRegistry {
 public:
  static PromptRegistry embedded();
  static PromptRegistry from_yaml(std::string_view yaml_text);
  static PromptRegistry from_file(const std::filesystem::path& path);

  bool has(std::string_view key) const;
  const std::string& get(std::string_view key) const;  // MissingPrompt
  void set(const std::string& key, std::string value);
  void erase(const std::string& key);

  ChunkConfig chunk_config() const;
  std::size_t identification_snippet_chars() const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

// Substitutes each "{name}" whose name is a key of `values`; other braces stay.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values);

struct PromptPair {
  std::string system;         // empty for the general pairing
  std::string user_template;  // contains {placeholder}
  std::string placeholder;    // "content" or "chunk"

  std::string render_user(std::string_view text) const;
};

// Standard families pair their system prompt with the shared chunk prompt;
// `unknown` gets the general extraction prompt with no system prompt.
PromptPair select_prompt(store::Standard standard, const PromptRegistry& registry);

}  // namespace certkg::ingest
