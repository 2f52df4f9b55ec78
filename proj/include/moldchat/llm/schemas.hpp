// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "moldchat/llm/types.hpp"

// Structured values exchanged with the language model. These are the shared
// vocabulary of the pipeline, so they live in the top-level namespace.
namespace moldchat {

enum class ToolName { kTableRetriever, kManualRetriever, kInternetSearch, kLlmInfer, kDiffusionModel };

inline constexpr std::array<ToolName, 5> kAllTools = {
    ToolName::kTableRetriever, ToolName::kManualRetriever, ToolName::kInternetSearch,
    ToolName::kLlmInfer, ToolName::kDiffusionModel};

std::string_view to_string(ToolName tool);
/// Accepts the registered names (case-insensitive) plus the "lm_infer" spelling.
std::optional<ToolName> tool_from_string(std::string_view name);

enum class Category { kInjection, kNoInjection };
std::string_view to_string(Category c);

enum class Decision { kRespond, kReplan };
std::string_view to_string(Decision d);

struct Translation {
  std::string translated_query;
  std::string language;
  bool operator==(const Translation&) const = default;
};

struct PlanStep {
  ToolName tool = ToolName::kLlmInfer;
  std::string task;
  bool operator==(const PlanStep&) const = default;
};

struct Plan {
  std::vector<PlanStep> steps;
  bool operator==(const Plan&) const = default;
};

/// "(tool, task)" rendering used in prompts and traces.
std::string render_step(const PlanStep& step);
std::string render_plan(const Plan& plan);

/// Inputs of the diffusion tool. Missing values stay empty, never guessed.
struct DiffusionInputs {
  std::optional<double> machine_temperature;
  std::optional<double> machine_humidity;
  std::optional<double> factory_temperature;
  std::optional<double> factory_humidity;
  std::optional<int> product_class;  // 0 good, 1 defective

  /// Human-readable names of the environment fields that are missing, in
  /// machine temperature, machine humidity, factory temperature, factory
  /// humidity order.
  std::vector<std::string> missing_environment() const;
  bool environment_complete() const { return missing_environment().empty(); }
  bool operator==(const DiffusionInputs&) const = default;
};

struct JudgeScore {
  std::string relevance_comment;
  std::string accuracy_comment;
  int rating = 0;
};

}  // namespace moldchat

namespace moldchat::llm {

/// Text appended to prompts in place of {format_instructions}.
std::string format_instructions(SchemaId schema);

Translation parse_translation(const std::string& text);
Category parse_category(const std::string& text);
Decision parse_decision(const std::string& text);
Plan parse_plan(const std::string& text);
DiffusionInputs parse_diffusion_inputs(const std::string& text);
JudgeScore parse_judge_score(const std::string& text);

/// Schema-dispatched parse returning a canonical JSON value. Throws
/// ParseError carrying the offending text.
nlohmann::json parse_structured(const std::string& text, SchemaId schema);

nlohmann::json to_json(const Plan& plan);
nlohmann::json to_json(const DiffusionInputs& inputs);

}  // namespace moldchat::llm
