// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/llm/prompts.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "moldchat/common/error.hpp"
#include "moldchat/common/text.hpp"

#ifndef MOLDCHAT_PROMPT_DIR
#define MOLDCHAT_PROMPT_DIR "prompts"
#endif

namespace moldchat::llm {

namespace {

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Calls fn(begin, end, name) for every {identifier} occurrence.
template <typename Fn>
void scan_placeholders(const std::string& s, Fn fn) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '{') continue;
    std::size_t j = i + 1;
    while (j < s.size() && is_ident_char(s[j])) ++j;
    if (j > i + 1 && j < s.size() && s[j] == '}') {
      fn(i, j + 1, s.substr(i + 1, j - i - 1));
      i = j;
    }
  }
}

}  // namespace

PromptTemplate::PromptTemplate(std::string name, const std::string& source) : name_(std::move(name)) {
  std::istringstream in(source);
  std::string line;
  std::string body;
  bool header = true;
  while (std::getline(in, line)) {
    if (header && text::starts_with_icase(line, "#")) {
      const std::string meta = text::trim(line.substr(1));
      if (text::starts_with_icase(meta, "version:")) version_ = std::stoi(text::trim(meta.substr(8)));
      continue;
    }
    header = false;
    body += line;
    body += '\n';
  }
  body_ = text::trim(body);
  scan_placeholders(body_, [&](std::size_t, std::size_t, const std::string& n) { placeholders_.insert(n); });
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
  for (const auto& p : placeholders_) {
    if (!values.count(p)) throw ValidationError("prompt '" + name_ + "' needs a value for {" + p + "}");
  }
  std::string out;
  std::size_t last = 0;
  scan_placeholders(body_, [&](std::size_t b, std::size_t e, const std::string& n) {
    out.append(body_, last, b - last);
    out += values.at(n);
    last = e;
  });
  out.append(body_, last, std::string::npos);
  return out;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("prompt directory not found: " + dir.string());
  PromptLibrary lib;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    std::ostringstream ss;
    ss << in.rdbuf();
    lib.add(PromptTemplate(entry.path().stem().string(), ss.str()));
  }
  return lib;
}

std::filesystem::path PromptLibrary::default_dir() { return MOLDCHAT_PROMPT_DIR; }

void PromptLibrary::add(PromptTemplate tmpl) {
  const std::string name = tmpl.name();
  templates_[name] = std::move(tmpl);
}

const PromptTemplate& PromptLibrary::get(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw ConfigError("prompt template '" + name + "' is not loaded");
  return it->second;
}

std::string PromptLibrary::render(const std::string& name, const std::map<std::string, std::string>& values) const {
  return get(name).render(values);
}

}  // namespace moldchat::llm
