// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <atomic>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "moldchat/diffusion/checkpoint.hpp"
#include "moldchat/llm/gateway.hpp"
#include "moldchat/llm/prompts.hpp"
#include "moldchat/llm/schemas.hpp"
#include "moldchat/retrieval/retrievers.hpp"
#include "moldchat/surrogate/gbt.hpp"
#include "moldchat/toolbox/search.hpp"

namespace moldchat::toolbox {

/// A named sub-step performed inside one tool call (e.g. the diffusion input
/// formatter before sampling).
struct SubStage {
  std::string name;
  std::string output;
  llm::Seconds elapsed{0.0};
};

struct ToolResult {
  ToolName tool = ToolName::kLlmInfer;
  std::string text;
  nlohmann::json artifacts;  // null when the tool produces no structured payload
  llm::Seconds elapsed{0.0};
  bool degraded = false;     // tool could not do its job; text explains why
  std::vector<llm::Completion> completions;
  std::vector<SubStage> substages;
};

struct FormattedDiffusionInputs {
  DiffusionInputs inputs;
  bool fallback = false;                 // parse failed after retry; all fields null
  std::vector<std::string> dropped;      // fields whose value was not in the subtask text
  std::vector<llm::Completion> completions;
};

/// Extracts the five diffusion inputs from the subtask. Values that cannot be
/// found among the numbers of the subtask are discarded.
FormattedDiffusionInputs format_diffusion_input(llm::Gateway& gateway, const llm::PromptLibrary& prompts,
                                                const std::string& subtask, llm::UsageMeter* scoped = nullptr);

struct DiffusionToolConfig {
  std::size_t candidates = diffusion::kDefaultCandidates;
  double guidance = diffusion::kDefaultGuidance;
  std::uint64_t seed = 0;
  diffusion::EnvBounds bounds{};
};

/// Missing-field report, or 64 guided candidates ranked by the surrogate with
/// the best one listed. Throws ToolUnavailableError when either model is
/// absent and inputs are complete.
ToolResult run_diffusion_tool(const DiffusionInputs& inputs, const diffusion::DiffusionModel* model,
                              const surrogate::Scorer* scorer, const DiffusionToolConfig& config = {});

/// Text sent back when a diffusion request lacks environment readings.
std::string missing_fields_report(const std::vector<std::string>& missing);

struct ToolboxDeps {
  llm::Gateway* gateway = nullptr;
  std::shared_ptr<const llm::PromptLibrary> prompts;
  std::shared_ptr<const retrieval::TableRetriever> table;
  std::shared_ptr<const retrieval::ManualRetriever> manual;
  std::shared_ptr<SearchProvider> search;
  std::shared_ptr<const diffusion::DiffusionModel> diffusion;
  std::shared_ptr<const surrogate::Scorer> surrogate;
  DiffusionToolConfig diffusion_config{};
  double llm_temperature = 0.7;
};

/// The five tools available to the executor.
class Toolbox {
 public:
  explicit Toolbox(ToolboxDeps deps);

  /// Runs `tool` exactly once. Tool failures throw; the executor turns them
  /// into result text.
  ToolResult invoke(ToolName tool, const std::string& subtask, llm::UsageMeter* scoped = nullptr) const;
  /// Name-based dispatch; unknown names throw NotFoundError.
  ToolResult invoke(std::string_view tool, const std::string& subtask, llm::UsageMeter* scoped = nullptr) const;

  std::size_t invocations(ToolName tool) const;
  const ToolboxDeps& deps() const { return deps_; }

 private:
  ToolResult table(const std::string& subtask, llm::UsageMeter* scoped) const;
  ToolResult manual(const std::string& subtask, llm::UsageMeter* scoped) const;
  ToolResult search(const std::string& subtask, llm::UsageMeter* scoped) const;
  ToolResult llm_infer(const std::string& subtask, llm::UsageMeter* scoped) const;
  ToolResult diffusion(const std::string& subtask, llm::UsageMeter* scoped) const;

  ToolboxDeps deps_;
  mutable std::array<std::atomic<std::size_t>, kAllTools.size()> counts_{};
};

}  // namespace moldchat::toolbox
