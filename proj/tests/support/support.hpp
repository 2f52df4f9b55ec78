// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moldchat/eval/harness.hpp"
#include "moldchat/llm/backend.hpp"
#include "moldchat/retrieval/embedding.hpp"
#include "moldchat/service/config.hpp"
#include "moldchat/service/engine.hpp"

namespace moldchat::test {

std::filesystem::path data_dir();
std::filesystem::path prompts_dir();

/// Fresh, empty directory under the system temp dir.
std::filesystem::path fresh_dir(const std::string& name);

nlohmann::json read_json(const std::filesystem::path& path);

/// Bundled desk configuration with session logging disabled.
service::ServiceConfig desk_config();
std::unique_ptr<service::Engine> desk_engine();

/// A turn from the bundled suites: id, query and category.
struct DeskTurn {
  std::string id;
  std::string query;
  std::string category;
};
/// The first `per_category` desk-suite tasks of each category, in suite order.
std::vector<DeskTurn> desk_turns(std::size_t per_category);

/// Non-English turns plus their English counterparts from the desk suite.
struct LanguageTurn {
  std::string id;
  std::string language;
  std::string kind;
  std::string query;
};
std::vector<LanguageTurn> multilingual_turns();

/// Greedy maximal marginal relevance evaluated by direct enumeration of
/// every remaining candidate each round.
std::vector<std::size_t> brute_force_mmr(const std::vector<std::int64_t>& ids,
                                         const std::vector<retrieval::EmbeddingVector>& vecs,
                                         const retrieval::EmbeddingVector& query, double lambda, std::size_t n);

/// Left-to-right dot product.
double dot(const std::vector<double>& a, const std::vector<double>& b);

/// Backend whose replies come from a callback.
class CallbackBackend final : public llm::Backend {
 public:
  using Fn = std::function<llm::BackendReply(const llm::CompletionRequest&)>;
  explicit CallbackBackend(Fn fn) : fn_(std::move(fn)) {}
  llm::BackendReply complete(const llm::CompletionRequest& request) override { return fn_(request); }
  std::string name() const override { return "callback"; }

 private:
  Fn fn_;
};

/// A judge reply and the rating it must parse to; empty when it must be
/// rejected.
struct JudgeCase {
  std::string text;
  std::optional<int> rating;
};
std::vector<JudgeCase> judge_fuzz_corpus();

/// Random evaluation records over the suite categories, some judged, some
/// with human scores, some failed.
std::vector<eval::EvalRecord> random_records(std::size_t n, std::uint64_t seed);

/// Per-category statistics recomputed from the raw records.
struct BruteRow {
  std::size_t tasks = 0;
  std::size_t rated = 0;
  double mean_rating = 0.0;
  double std_rating = 0.0;
  double mean_latency_s = 0.0;
  double total_cost = 0.0;
  double tool_miss_rate = 0.0;
  std::size_t failures = 0;
};
std::map<std::string, BruteRow> brute_force_aggregate(const std::vector<eval::EvalRecord>& records);

/// Scripted backend over the bundled desk fixture.
std::shared_ptr<llm::ScriptedBackend> desk_backend();

}  // namespace moldchat::test
