// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>

namespace moldchat::llm {

/// A prompt template with {name} placeholders. Leading "# key: value" lines
/// are metadata and are not part of the body.
class PromptTemplate {
 public:
  PromptTemplate() = default;
  PromptTemplate(std::string name, const std::string& source);

  const std::string& name() const { return name_; }
  const std::string& body() const { return body_; }
  int version() const { return version_; }
  const std::set<std::string>& placeholders() const { return placeholders_; }

  /// Substitutes every placeholder. Throws ValidationError when a
  /// placeholder has no value.
  std::string render(const std::map<std::string, std::string>& values) const;

 private:
  std::string name_;
  std::string body_;
  int version_ = 0;
  std::set<std::string> placeholders_;
};

class PromptLibrary {
 public:
  PromptLibrary() = default;

  /// Loads every *.txt file in `dir`; the stem becomes the template name.
  static PromptLibrary load(const std::filesystem::path& dir);
  /// Directory configured at build time.
  static std::filesystem::path default_dir();

  void add(PromptTemplate tmpl);
  bool contains(const std::string& name) const { return templates_.count(name) != 0; }
  const PromptTemplate& get(const std::string& name) const;
  std::string render(const std::string& name, const std::map<std::string, std::string>& values) const;
  std::size_t size() const { return templates_.size(); }

 private:
  std::map<std::string, PromptTemplate> templates_;
};

}  // namespace moldchat::llm
