#include "certkg/ingest/prompts.hpp"

#include "certkg/embedded_prompts.hpp"
#include "certkg/error.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <sstream>

namespace certkg::ingest {
namespace {

void flatten(const YAML::Node& node, const std::string& prefix, std::map<std::string, std::string>& out) {
  if (node.IsMap()) {
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      flatten(kv.second, prefix.empty() ? key : prefix + "." + key, out);
    }
  } else if (node.IsScalar()) {
    out[prefix] = node.as<std::string>();
  } else if (!node.IsNull()) {
    throw Error(ErrorCode::InvalidConfig, "prompt registry entry '" + prefix + "' must be a string");
  }
}

std::size_t positive_number(const PromptRegistry& r, const std::string& key, std::size_t fallback) {
  if (!r.has(key)) return fallback;
  try {
    const long long v = std::stoll(r.get(key));
    if (v < 0) throw std::invalid_argument("negative");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, "'" + key + "' must be a non-negative integer");
  }
}

}  // namespace

PromptRegistry PromptRegistry::embedded() { return from_yaml(embedded::kPromptsYaml); }

PromptRegistry PromptRegistry::from_yaml(std::string_view yaml_text) {
  PromptRegistry r;
  try {
    flatten(YAML::Load(std::string(yaml_text)), "", r.entries_);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("prompt registry: ") + e.what());
  }
  return r;
}

PromptRegistry PromptRegistry::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read prompt registry " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_yaml(ss.str());
}

bool PromptRegistry::has(std::string_view key) const { return entries_.contains(std::string(key)); }

const std::string& PromptRegistry::get(std::string_view key) const {
  auto it = entries_.find(std::string(key));
  if (it == entries_.end()) {
    throw Error(ErrorCode::MissingPrompt, "prompt registry has no '" + std::string(key) + "'",
                {{"key", std::string(key)}});
  }
  return it->second;
}

void PromptRegistry::set(const std::string& key, std::string value) { entries_[key] = std::move(value); }

void PromptRegistry::erase(const std::string& key) { entries_.erase(key); }

ChunkConfig PromptRegistry::chunk_config() const {
  ChunkConfig c;
  c.chunk_size = positive_number(*this, "chunk_size", c.chunk_size);
  c.overlap = positive_number(*this, "overlap", c.overlap);
  c.validate();
  return c;
}

std::size_t PromptRegistry::identification_snippet_chars() const {
  return positive_number(*this, "identification_snippet_chars", 2000);
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const std::size_t close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

std::string PromptPair::render_user(std::string_view text) const {
  return render(user_template, {{placeholder, std::string(text)}});
}

PromptPair select_prompt(store::Standard standard, const PromptRegistry& registry) {
  if (standard == store::Standard::Unknown) {
    return PromptPair{"", registry.get("extraction.general"), "content"};
  }
  return PromptPair{registry.get("extraction." + std::string(store::to_string(standard))),
                    registry.get("extraction.chunk_user"), "chunk"};
}

}  // namespace certkg::ingest
