// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/llm/types.hpp"

#include "moldchat/common/error.hpp"

namespace moldchat::llm {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kSystem:
      return "system";
    case Role::kUser:
      return "user";
    case Role::kAssistant:
      return "assistant";
  }
  return "user";
}

std::string_view to_string(SchemaId id) {
  switch (id) {
    case SchemaId::kTranslation:
      return "translation";
    case SchemaId::kCategory:
      return "category";
    case SchemaId::kPlan:
      return "plan";
    case SchemaId::kDecision:
      return "decision";
    case SchemaId::kDiffusionInputs:
      return "diffusion_inputs";
    case SchemaId::kJudgeScore:
      return "judge_score";
  }
  return "unknown";
}

SchemaId schema_from_string(std::string_view name) {
  for (SchemaId id : {SchemaId::kTranslation, SchemaId::kCategory, SchemaId::kPlan,
                      SchemaId::kDecision, SchemaId::kDiffusionInputs, SchemaId::kJudgeScore}) {
    if (to_string(id) == name) return id;
  }
  throw PreconditionError("unregistered schema '" + std::string(name) + "'");
}

std::string prompt_text(const CompletionRequest& request) {
  std::string out;
  for (const auto& m : request.messages) {
    if (!out.empty()) out.push_back('\n');
    out += m.content;
  }
  return out;
}

}  // namespace moldchat::llm
