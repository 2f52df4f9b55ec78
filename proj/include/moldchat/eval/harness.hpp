// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moldchat/llm/gateway.hpp"
#include "moldchat/llm/prompts.hpp"
#include "moldchat/llm/schemas.hpp"
#include "moldchat/orchestrator/turn.hpp"

namespace moldchat::eval {

/// Task categories: four single-tool ones and three diffusion hybrids.
inline constexpr std::array<std::string_view, 7> kCategories = {
    "table", "manual", "diffusion", "general", "diffusion+table", "diffusion+manual", "diffusion+search"};

bool is_hybrid(std::string_view category);

struct EvalTask {
  std::string id;
  std::string query;
  std::string category;
  std::set<ToolName> expected_tools;
};

/// Validates categories, tool names and hybrid tool counts; ids must be unique.
std::vector<EvalTask> suite_from_json(const nlohmann::json& doc);
std::vector<EvalTask> load_suite(const std::filesystem::path& path);

struct EvalRecord {
  std::string task_id;
  std::string category;
  std::string query;
  std::string answer;
  std::string language;
  std::set<ToolName> expected_tools;
  std::set<ToolName> tools_used;
  std::vector<std::string> stages;
  llm::Seconds latency{0.0};
  llm::TokenUsage usage;
  double cost = 0.0;
  bool failed = false;
  std::string error;
  bool tool_miss = false;
  std::optional<JudgeScore> judge;
  std::string judge_error;
  std::optional<double> human;

  nlohmann::json to_json() const;
};

/// Tools executed in a turn, read from execute stages and ReAct searches.
std::set<ToolName> tools_used(const orchestrator::TurnTrace& trace);

/// Answers one query on a fresh conversation.
using ChatEngine = std::function<orchestrator::ChatTurn(const std::string& query)>;

/// One record per task ordered by task id. Engine exceptions become failed
/// records. Up to `concurrency` tasks run at once.
std::vector<EvalRecord> run_suite(const std::vector<EvalTask>& tasks, const ChatEngine& engine,
                                  std::size_t concurrency = 1);

/// Scores an answer with the judge prompt. Throws ParseError when the rating
/// is unusable after the reformat retry.
JudgeScore judge(const std::string& question, const std::string& answer, llm::Gateway& gateway,
                 const llm::PromptLibrary& prompts, llm::UsageMeter* scoped = nullptr);

/// Fills judge or judge_error on every record that has an answer.
void judge_records(std::vector<EvalRecord>& records, llm::Gateway& gateway, const llm::PromptLibrary& prompts);

/// Sample Pearson correlation. Throws PreconditionError on length mismatch
/// or fewer than two points, NumericError on zero variance.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

/// {task id: score} file of human ratings.
std::map<std::string, double> load_human_scores(const std::filesystem::path& path);
std::map<std::string, double> human_scores_from_json(const nlohmann::json& doc);
/// Returns the number of records that received a score.
std::size_t attach_human_scores(std::vector<EvalRecord>& records, const std::map<std::string, double>& scores);

struct CategoryRow {
  std::string category;
  std::size_t tasks = 0;
  std::size_t rated = 0;
  double mean_rating = 0.0;
  double std_rating = 0.0;  // population standard deviation
  double mean_latency_s = 0.0;
  double mean_cost = 0.0;
  double total_cost = 0.0;
  double tool_miss_rate = 0.0;
  std::size_t failures = 0;
  llm::TokenUsage usage;
};

struct SuiteReport {
  std::vector<CategoryRow> rows;  // ordered by category name
  std::size_t tasks = 0;
  double total_cost = 0.0;
  double mean_latency_s = 0.0;
  /// Judge-vs-human agreement over records carrying both scores.
  std::optional<double> judge_human_pearson;
  std::size_t paired = 0;

  nlohmann::json to_json() const;
  /// Tab-separated table, one row per category plus a total line.
  std::string to_tsv() const;
};

SuiteReport aggregate(const std::vector<EvalRecord>& records);

/// Writes <stem>.json (report plus records) and <stem>.tsv.
void write_report(const SuiteReport& report, const std::vector<EvalRecord>& records,
                  const std::filesystem::path& stem);

}  // namespace moldchat::eval
