// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "moldchat/llm/gateway.hpp"
#include "moldchat/llm/prompts.hpp"
#include "moldchat/llm/schemas.hpp"
#include "moldchat/orchestrator/turn.hpp"
#include "moldchat/toolbox/tools.hpp"

namespace moldchat::orchestrator {

inline constexpr const char* kOutOfScope = "This is out of my scope. Please specify the task.";

struct FormattedTask {
  std::string current_request;
  std::vector<std::string> relevant_history;

  /// Request followed by the carried-over details, the text handed to the
  /// translator.
  std::string render() const;
};

/// Reads the formatter's two-heading layout. Falls back to the whole reply
/// as the request when the headings are absent.
FormattedTask parse_formatted_task(const std::string& reply);

struct PastStep {
  PlanStep step;
  std::string result;
};

/// Numbered "(tool, task)" / "Result:" listing used by supervisor, replanner
/// and reporter prompts.
std::string render_past_steps(const std::vector<PastStep>& past);

enum class ReportMode { kGeneral, kInjection };

struct PipelineConfig {
  /// Planning rounds (initial plan plus replans) allowed per turn; when
  /// reached the supervisor's next replan is turned into a forced respond.
  int replan_cap = 5;
  int react_cap = 6;
  double temperature = 0.7;
  double strict_temperature = 0.0;  // classifier and supervisor
  std::size_t history_pairs = 10;
  bool debug_prompts = false;
};

/// Per-turn scratch state: the trace and a meter scoped to this turn.
struct TurnState {
  TurnTrace trace;
  llm::UsageMeter meter;
};

/// The chat pipeline: format, translate, classify, then either the ReAct
/// agent or the plan / execute / supervise / replan loop, then report.
/// Stateless between turns; safe to share across sessions.
class Pipeline {
 public:
  Pipeline(llm::Gateway& gateway, std::shared_ptr<const llm::PromptLibrary> prompts,
           std::shared_ptr<const toolbox::Toolbox> tools, PipelineConfig config = {});

  /// Runs one turn and appends (input, report) to `history`. Empty input
  /// returns a clarification request without touching history.
  ChatTurn run_turn(const std::string& user_input, ChatHistory& history) const;

  FormattedTask format_task(const std::string& user_input, const ChatHistory& history, TurnState& st) const;
  Translation translate(const FormattedTask& task, TurnState& st) const;
  Category classify(const Translation& translation, const ChatHistory& history, TurnState& st) const;
  std::string run_react(const Translation& task, TurnState& st) const;
  Plan plan(const Translation& task, TurnState& st) const;
  PastStep execute_step(const Plan& plan, const std::vector<PastStep>& past, TurnState& st) const;
  Decision supervise(const Translation& task, const Plan& plan, const std::vector<PastStep>& past,
                     TurnState& st) const;
  Plan replan(const Translation& task, const Plan& plan, const std::vector<PastStep>& past, TurnState& st) const;
  std::string report(const std::string& input_eng, const std::string& payload, const std::string& language,
                     ReportMode mode, TurnState& st) const;

  /// Plan / execute / supervise / replan until respond; returns past steps.
  std::vector<PastStep> run_plan_loop(const Translation& task, TurnState& st) const;

  const PipelineConfig& config() const { return config_; }
  const toolbox::Toolbox& tools() const { return *tools_; }

 private:
  llm::CompletionRequest request(const std::string& stage, const std::string& prompt, double temperature,
                                 std::optional<llm::SchemaId> schema = std::nullopt) const;
  StageRecord& record(TurnState& st, const std::string& stage, const llm::CompletionRequest* req,
                      const std::vector<llm::Completion>& calls, std::string raw, llm::Seconds duration) const;
  Plan planned(const std::string& stage, const llm::CompletionRequest& req, const Translation& task,
               TurnState& st) const;

  llm::Gateway& gateway_;
  std::shared_ptr<const llm::PromptLibrary> prompts_;
  std::shared_ptr<const toolbox::Toolbox> tools_;
  PipelineConfig config_;
};

}  // namespace moldchat::orchestrator
