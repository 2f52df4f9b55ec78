// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/orchestrator/turn.hpp"

#include <algorithm>

#include "moldchat/common/error.hpp"
#include "moldchat/common/text.hpp"

namespace moldchat::orchestrator {

void ChatHistory::append(const std::string& user_input, const std::string& report) {
  if (text::trim(user_input).empty()) throw PreconditionError("history entries need non-empty user input");
  if (text::trim(report).empty()) throw PreconditionError("history entries need a non-empty report");
  entries_.push_back({llm::Role::kUser, user_input});
  entries_.push_back({llm::Role::kAssistant, report});
}

std::string ChatHistory::render(std::size_t max_pairs) const {
  if (entries_.empty()) return "(no earlier turns)";
  const std::size_t keep = std::min(entries_.size(), max_pairs * 2);
  std::string out;
  for (std::size_t i = entries_.size() - keep; i < entries_.size(); ++i) {
    if (!out.empty()) out += '\n';
    out += entries_[i].role == llm::Role::kUser ? "User: " : "Assistant: ";
    out += entries_[i].text;
  }
  return out;
}

nlohmann::json ChatHistory::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : entries_) out.push_back({{"role", llm::to_string(e.role)}, {"text", e.text}});
  return out;
}

ChatHistory ChatHistory::from_json(const nlohmann::json& doc) {
  ChatHistory h;
  if (!doc.is_array() || doc.size() % 2 != 0) throw ValidationError("history must be a list of user/assistant pairs");
  for (std::size_t i = 0; i < doc.size(); i += 2) {
    if (doc[i].at("role") != "user" || doc[i + 1].at("role") != "assistant") {
      throw ValidationError("history entries must alternate user and assistant");
    }
    h.append(doc[i].at("text").get<std::string>(), doc[i + 1].at("text").get<std::string>());
  }
  return h;
}

StageRecord& TurnTrace::append(StageRecord record) {
  stages_.push_back(std::move(record));
  return stages_.back();
}

StageRecord& TurnTrace::back() {
  if (stages_.empty()) throw PreconditionError("trace is empty");
  return stages_.back();
}

std::vector<std::string> TurnTrace::stage_names() const {
  std::vector<std::string> out;
  out.reserve(stages_.size());
  for (const auto& s : stages_) out.push_back(s.stage);
  return out;
}

std::size_t TurnTrace::count(const std::string& stage) const {
  return static_cast<std::size_t>(
      std::count_if(stages_.begin(), stages_.end(), [&](const StageRecord& s) { return s.stage == stage; }));
}

bool TurnTrace::has_flag(const std::string& flag) const {
  return std::any_of(stages_.begin(), stages_.end(), [&](const StageRecord& s) {
    return std::find(s.flags.begin(), s.flags.end(), flag) != s.flags.end();
  });
}

nlohmann::json TurnTrace::to_json(bool with_durations) const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : stages_) {
    nlohmann::json j{{"stage", s.stage},
                     {"prompt_digest", s.prompt_digest},
                     {"raw_output", s.raw_output},
                     {"flags", s.flags},
                     {"detail", s.detail}};
    if (!s.prompt.empty()) j["prompt"] = s.prompt;
    if (with_durations) j["duration_s"] = s.duration.count();
    out.push_back(std::move(j));
  }
  return out;
}

nlohmann::json ChatTurn::to_json(bool with_durations) const {
  nlohmann::json j{{"user_input", user_input},
                   {"language", language},
                   {"category", category},
                   {"final_report", final_report},
                   {"usage", {{"input_tokens", usage.input_tokens}, {"output_tokens", usage.output_tokens}}},
                   {"cost", cost},
                   {"failed", failed},
                   {"trace", trace.to_json(with_durations)}};
  if (with_durations) j["latency_s"] = latency.count();
  return j;
}

}  // namespace moldchat::orchestrator
