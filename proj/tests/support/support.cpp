// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "support.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include <unistd.h>

#include "moldchat/common/error.hpp"
#include "moldchat/eval/harness.hpp"

#ifndef MOLDCHAT_DATA_DIR
#define MOLDCHAT_DATA_DIR "data"
#endif

namespace moldchat::test {

namespace fs = std::filesystem;

fs::path data_dir() { return MOLDCHAT_DATA_DIR; }

fs::path prompts_dir() { return data_dir().parent_path() / "prompts"; }

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("moldchat-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return nlohmann::json::parse(in);
}

service::ServiceConfig desk_config() {
  auto config = service::ServiceConfig::load(data_dir() / "desk.config.json");
  config.log_dir.clear();
  return config;
}

std::unique_ptr<service::Engine> desk_engine() { return service::build_engine(desk_config()); }

std::shared_ptr<llm::ScriptedBackend> desk_backend() {
  return std::make_shared<llm::ScriptedBackend>(llm::ScriptedFixture::load(data_dir() / "fixtures" / "desk.json"));
}

std::vector<DeskTurn> desk_turns(std::size_t per_category) {
  std::map<std::string, std::size_t> seen;
  std::vector<DeskTurn> out;
  for (const auto& t : eval::load_suite(data_dir() / "suites" / "desk.suite.json")) {
    if (seen[t.category]++ < per_category) out.push_back({t.id, t.query, t.category});
  }
  return out;
}

std::vector<LanguageTurn> multilingual_turns() {
  std::map<std::string, std::string> english_ids = {
      {"table", "table-01"}, {"manual", "manual-01"}, {"diffusion", "diffusion-01"}, {"search", "general-01"}};
  std::map<std::string, std::string> queries;
  for (const auto& t : eval::load_suite(data_dir() / "suites" / "desk.suite.json")) queries[t.id] = t.query;
  std::vector<LanguageTurn> out;
  for (const auto& [kind, id] : english_ids) out.push_back({"en-" + kind, "English", kind, queries.at(id)});
  const auto doc = read_json(data_dir() / "suites" / "multilingual.json");
  for (const auto& j : doc.at("turns")) {
    out.push_back({j.at("id"), j.at("language"), j.at("kind"), j.at("query")});
  }
  return out;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<std::size_t> brute_force_mmr(const std::vector<std::int64_t>& ids,
                                         const std::vector<retrieval::EmbeddingVector>& vecs,
                                         const retrieval::EmbeddingVector& query, double lambda, std::size_t n) {
  std::vector<std::size_t> selected;
  std::vector<bool> taken(vecs.size(), false);
  while (selected.size() < std::min(n, vecs.size())) {
    std::size_t best = vecs.size();
    double best_score = 0.0;
    double best_rel = 0.0;
    for (std::size_t i = 0; i < vecs.size(); ++i) {
      if (taken[i]) continue;
      const double rel = dot(vecs[i].values(), query.values());
      double red = 0.0;
      for (std::size_t k = 0; k < selected.size(); ++k) {
        const double s = dot(vecs[i].values(), vecs[selected[k]].values());
        if (k == 0 || s > red) red = s;
      }
      const double score = lambda * rel - (1.0 - lambda) * red;
      bool better = best == vecs.size() || score > best_score ||
                    (score == best_score && (rel > best_rel || (rel == best_rel && ids[i] < ids[best])));
      if (better) {
        best = i;
        best_score = score;
        best_rel = rel;
      }
    }
    taken[best] = true;
    selected.push_back(best);
  }
  return selected;
}

std::vector<JudgeCase> judge_fuzz_corpus() {
  return {
      {"Relevance: on topic.\nAccuracy: correct.\nRating: 7", 7},
      {"rating: 10", 10},
      {"RATING: 0", 0},
      {"Relevance: ok\nAccuracy: ok\n**Rating:** 8", 8},
      {"Rating: 8/10", 8},
      {"Rating = 6", 6},
      {"Rating: 9.0", 9},
      {"Relevance: fine. Accuracy: fine. Rating: 5", 5},
      {"{\"relevance\": \"ok\", \"accuracy\": \"ok\", \"rating\": 4}", 4},
      {"Relevance: a\nAccuracy: b\nRating: 3   \n\n", 3},
      {"  rating :  6  ", 6},
      {"Rating: 7 (out of 10)", 7},
      {"Rating:\n3", std::nullopt},
      {"Rating: 11", std::nullopt},
      {"Rating: -1", std::nullopt},
      {"Rating: 0-10", std::nullopt},
      {"Rating: 1~10", std::nullopt},
      {"Rating: 7.5", std::nullopt},
      {"The answer is fine, no score given.", std::nullopt},
      {"Rating: N/A", std::nullopt},
  };
}

std::vector<eval::EvalRecord> random_records(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<eval::EvalRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    eval::EvalRecord r;
    r.task_id = "t" + std::to_string(1000 + i);
    r.category = std::string(eval::kCategories[rng() % eval::kCategories.size()]);
    r.latency = llm::Seconds{u(rng) * 20.0};
    r.cost = u(rng) * 0.05;
    r.usage = {static_cast<std::int64_t>(rng() % 5000), static_cast<std::int64_t>(rng() % 800)};
    r.failed = rng() % 10 == 0;
    r.tool_miss = rng() % 4 == 0;
    if (rng() % 5 != 0) r.judge = JudgeScore{"", "", static_cast<int>(rng() % 11)};
    if (rng() % 3 != 0) r.human = static_cast<double>(rng() % 11);
    out.push_back(std::move(r));
  }
  return out;
}

std::map<std::string, BruteRow> brute_force_aggregate(const std::vector<eval::EvalRecord>& records) {
  std::map<std::string, BruteRow> out;
  for (const auto& cat : eval::kCategories) {
    std::vector<const eval::EvalRecord*> list;
    for (const auto& r : records) {
      if (r.category == cat) list.push_back(&r);
    }
    if (list.empty()) continue;
    BruteRow row;
    row.tasks = list.size();
    std::vector<double> ratings;
    double latency = 0.0;
    std::size_t misses = 0;
    for (const auto* r : list) {
      if (r->judge) ratings.push_back(r->judge->rating);
      latency += r->latency.count();
      row.total_cost += r->cost;
      misses += r->tool_miss;
      row.failures += r->failed;
    }
    row.rated = ratings.size();
    if (!ratings.empty()) {
      double sum = 0.0;
      for (double x : ratings) sum += x;
      row.mean_rating = sum / ratings.size();
      double ss = 0.0;
      for (double x : ratings) ss += (x - row.mean_rating) * (x - row.mean_rating);
      row.std_rating = std::sqrt(ss / ratings.size());
    }
    row.mean_latency_s = latency / row.tasks;
    row.tool_miss_rate = static_cast<double>(misses) / row.tasks;
    out[std::string(cat)] = row;
  }
  return out;
}

}  // namespace moldchat::test
