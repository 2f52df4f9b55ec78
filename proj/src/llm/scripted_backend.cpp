// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>

#include "moldchat/common/error.hpp"
#include "moldchat/llm/backend.hpp"

namespace moldchat::llm {

namespace {

FixtureRule rule_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("response")) {
    throw ConfigError("fixture rule needs at least a 'response': " + j.dump());
  }
  FixtureRule rule;
  if (j.contains("stage") && !j.at("stage").is_null()) rule.stage = j.at("stage").get<std::string>();
  if (j.contains("pattern")) {
    const auto& p = j.at("pattern");
    if (p.is_string()) {
      rule.patterns.push_back(p.get<std::string>());
    } else if (p.is_array()) {
      for (const auto& item : p) rule.patterns.push_back(item.get<std::string>());
    } else if (!p.is_null()) {
      throw ConfigError("fixture 'pattern' must be a string or list of strings");
    }
  }
  rule.response = j.at("response").get<std::string>();
  rule.estimate_usage = !j.contains("input_tokens") && !j.contains("output_tokens");
  rule.usage.input_tokens = j.value("input_tokens", std::int64_t{0});
  rule.usage.output_tokens = j.value("output_tokens", std::int64_t{0});
  if (rule.usage.input_tokens < 0 || rule.usage.output_tokens < 0) {
    throw ConfigError("fixture token counts must be non-negative");
  }
  return rule;
}

}  // namespace

ScriptedFixture::ScriptedFixture(std::vector<FixtureRule> rules) : rules_(std::move(rules)) {
  compiled_.reserve(rules_.size());
  for (const auto& rule : rules_) {
    Compiled c{rule, {}};
    for (const auto& pattern : rule.patterns) {
      try {
        c.regexes.emplace_back(pattern, std::regex::ECMAScript | std::regex::icase);
      } catch (const std::regex_error& e) {
        throw ConfigError("invalid fixture pattern '" + pattern + "': " + e.what());
      }
    }
    compiled_.push_back(std::move(c));
  }
}

ScriptedFixture ScriptedFixture::from_json(const nlohmann::json& doc) {
  const nlohmann::json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("rules")) throw ConfigError("fixture object must contain 'rules'");
    list = &doc.at("rules");
  }
  if (!list->is_array()) throw ConfigError("fixture rules must be a list");
  std::vector<FixtureRule> rules;
  for (const auto& j : *list) rules.push_back(rule_from_json(j));
  return ScriptedFixture(std::move(rules));
}

ScriptedFixture ScriptedFixture::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open fixture file " + path.string());
  auto doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError("fixture file " + path.string() + " is not valid JSON");
  return from_json(doc);
}

ScriptedFixture ScriptedFixture::merged_with(const ScriptedFixture& other) const {
  std::vector<FixtureRule> all = rules_;
  all.insert(all.end(), other.rules_.begin(), other.rules_.end());
  return ScriptedFixture(std::move(all));
}

const FixtureRule* ScriptedFixture::match(const CompletionRequest& request) const {
  const std::string text = prompt_text(request);
  for (const auto& c : compiled_) {
    if (c.rule.stage && *c.rule.stage != request.stage_tag) continue;
    bool all = true;
    for (const auto& re : c.regexes) {
      if (!std::regex_search(text, re)) {
        all = false;
        break;
      }
    }
    if (all) return &c.rule;
  }
  return nullptr;
}

std::vector<std::string> ScriptedFixture::captures(const FixtureRule& rule, const CompletionRequest& request) const {
  std::vector<std::string> out;
  const Compiled* compiled = nullptr;
  for (const auto& c : compiled_) {
    if (&c.rule == &rule) compiled = &c;
  }
  if (compiled == nullptr) return out;
  const std::string text = prompt_text(request);
  for (const auto& re : compiled->regexes) {
    std::smatch m;
    if (!std::regex_search(text, m, re)) continue;
    for (std::size_t g = 1; g < m.size(); ++g) out.push_back(m[g].str());
  }
  return out;
}

BackendReply ScriptedBackend::complete(const CompletionRequest& request) {
  const FixtureRule* rule = fixture_.match(request);
  if (!rule) throw FixtureMissError(request.stage_tag.empty() ? "<untagged>" : request.stage_tag);
  std::string text = rule->response;
  if (text.find("{{") != std::string::npos) {
    const auto groups = fixture_.captures(*rule, request);
    for (std::size_t i = 1; i <= groups.size(); ++i) {
      const std::string key = "{{" + std::to_string(i) + "}}";
      for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + groups[i - 1].size())) {
        text.replace(pos, key.size(), groups[i - 1]);
      }
    }
  }
  TokenUsage usage = rule->usage;
  if (rule->estimate_usage) {
    usage.input_tokens = static_cast<std::int64_t>((prompt_text(request).size() + 3) / 4);
    usage.output_tokens = static_cast<std::int64_t>((text.size() + 3) / 4);
  }
  return BackendReply{std::move(text), usage};
}

}  // namespace moldchat::llm
