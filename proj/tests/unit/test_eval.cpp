// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "moldchat/common/error.hpp"
#include "moldchat/eval/harness.hpp"
#include "moldchat/llm/gateway.hpp"
#include "moldchat/llm/schemas.hpp"
#include "support.hpp"

using namespace moldchat;
using namespace moldchat::eval;

namespace {

orchestrator::ChatTurn turn_using(unsigned tool_mask, bool searched_in_react = false) {
  orchestrator::ChatTurn t;
  t.final_report = "answer";
  t.language = "English";
  for (std::size_t k = 0; k < kAllTools.size(); ++k) {
    if (tool_mask & (1U << k)) {
      orchestrator::StageRecord rec;
      rec.stage = "execute";
      rec.detail = {{"tool", std::string(to_string(kAllTools[k]))}};
      t.trace.append(rec);
    }
  }
  if (searched_in_react) {
    orchestrator::StageRecord rec;
    rec.stage = "react";
    rec.detail = {{"searched", true}};
    t.trace.append(rec);
  }
  return t;
}

}  // namespace

TEST_CASE("pearson matches hand-computed values") {
  CHECK(std::abs(pearson({1, 2, 3, 4}, {1, 3, 2, 4}) - 0.8) <= 1e-12);
  CHECK(std::abs(pearson({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5}) - 0.8) <= 1e-12);
  CHECK(std::abs(pearson({1, 2, 3}, {2, 4, 6}) - 1.0) <= 1e-12);
  CHECK(std::abs(pearson({1, 2, 3}, {3, 2, 1}) + 1.0) <= 1e-12);
  CHECK(std::abs(pearson({0, 0, 1, 1}, {0, 1, 0, 1})) <= 1e-12);
  CHECK_THROWS_AS(pearson({1, 1, 1}, {1, 2, 3}), NumericError);
  CHECK_THROWS_AS(pearson({1}, {1}), PreconditionError);
  CHECK_THROWS_AS(pearson({1, 2}, {1, 2, 3}), PreconditionError);
}

TEST_CASE("pearson is symmetric and invariant to positive affine maps") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(8), y(8), z(8);
    for (int i = 0; i < 8; ++i) {
      x[i] = u(rng);
      y[i] = u(rng);
      z[i] = 3.0 * y[i] + 7.0;
    }
    const double r = pearson(x, y);
    CHECK(r >= -1.0);
    CHECK(r <= 1.0);
    CHECK(pearson(y, x) == doctest::Approx(r).epsilon(1e-12));
    CHECK(pearson(x, z) == doctest::Approx(r).epsilon(1e-9));
  }
}

TEST_CASE("judge parser fuzz corpus") {
  const auto corpus = test::judge_fuzz_corpus();
  REQUIRE(corpus.size() == 20);
  for (const auto& c : corpus) {
    INFO(c.text);
    if (c.rating) {
      CHECK(llm::parse_judge_score(c.text).rating == *c.rating);
    } else {
      CHECK_THROWS_AS(llm::parse_judge_score(c.text), ParseError);
    }
  }
  auto s = llm::parse_judge_score("Relevance: direct.\nAccuracy: matches the manual.\nRating: 8");
  CHECK(s.relevance_comment == "direct.");
  CHECK(s.accuracy_comment == "matches the manual.");
}

TEST_CASE("judge retries once and records parse failures per record") {
  int calls = 0;
  auto backend = std::make_shared<test::CallbackBackend>([&](const llm::CompletionRequest& r) {
    ++calls;
    CHECK(r.stage_tag == "judge");
    CHECK(r.temperature == 0.0);
    const std::string& prompt = r.messages.front().content;
    if (prompt.find("good question") != std::string::npos) return llm::BackendReply{"Rating: 9", {}};
    return llm::BackendReply{"Rating: 0-10", {}};
  });
  llm::Gateway gw(backend, llm::PriceTable{}, "m");
  auto prompts = llm::PromptLibrary::load(test::prompts_dir());
  std::vector<EvalRecord> records(3);
  records[0].query = "good question";
  records[0].answer = "a";
  records[1].query = "bad question";
  records[1].answer = "b";
  records[2].query = "unanswered";
  judge_records(records, gw, prompts);
  REQUIRE(records[0].judge);
  CHECK(records[0].judge->rating == 9);
  CHECK_FALSE(records[1].judge);
  CHECK_FALSE(records[1].judge_error.empty());
  CHECK_FALSE(records[2].judge);
  CHECK(calls == 3);
}

TEST_CASE("aggregate equals a brute-force recomputation") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto records = test::random_records(40, seed);
    const auto rep = aggregate(records);
    const auto want = test::brute_force_aggregate(records);
    REQUIRE(rep.rows.size() == want.size());
    CHECK(rep.tasks == 40);
    double cost = 0.0, latency = 0.0;
    for (const auto& r : records) {
      cost += r.cost;
      latency += r.latency.count();
    }
    CHECK(rep.total_cost == doctest::Approx(cost).epsilon(1e-12));
    CHECK(rep.mean_latency_s == doctest::Approx(latency / 40).epsilon(1e-12));
    for (const auto& row : rep.rows) {
      INFO(row.category);
      const auto& w = want.at(row.category);
      CHECK(row.tasks == w.tasks);
      CHECK(row.rated == w.rated);
      CHECK(row.failures == w.failures);
      CHECK(row.mean_rating == doctest::Approx(w.mean_rating).epsilon(1e-12));
      CHECK(row.std_rating == doctest::Approx(w.std_rating).epsilon(1e-12));
      CHECK(row.mean_latency_s == doctest::Approx(w.mean_latency_s).epsilon(1e-12));
      CHECK(row.total_cost == doctest::Approx(w.total_cost).epsilon(1e-12));
      CHECK(row.tool_miss_rate == doctest::Approx(w.tool_miss_rate).epsilon(1e-12));
    }
    std::vector<double> judged, human;
    for (const auto& r : records) {
      if (r.judge && r.human) {
        judged.push_back(r.judge->rating);
        human.push_back(*r.human);
      }
    }
    CHECK(rep.paired == judged.size());
    REQUIRE(rep.judge_human_pearson);
    CHECK(*rep.judge_human_pearson == doctest::Approx(pearson(judged, human)).epsilon(1e-12));
  }
  const auto empty = aggregate({});
  CHECK(empty.rows.empty());
  CHECK_FALSE(empty.judge_human_pearson);
}

TEST_CASE("tool_miss fires exactly when expected tools are not a subset of used tools") {
  const std::size_t n = kAllTools.size();
  for (unsigned expected = 0; expected < (1U << n); ++expected) {
    std::vector<EvalTask> tasks;
    for (unsigned used = 0; used < (1U << n); ++used) {
      EvalTask t;
      t.id = "u" + std::to_string(100 + used);
      t.query = std::to_string(used);
      t.category = "table";
      for (std::size_t k = 0; k < n; ++k) {
        if (expected & (1U << k)) t.expected_tools.insert(kAllTools[k]);
      }
      tasks.push_back(t);
    }
    auto records = run_suite(tasks, [](const std::string& q) { return turn_using(std::stoul(q)); });
    for (const auto& r : records) {
      const unsigned used = std::stoul(r.query);
      CHECK(r.tool_miss == ((expected & ~used) != 0));
    }
  }
  const auto via_react = tools_used(turn_using(0, true).trace);
  CHECK(via_react == std::set<ToolName>{ToolName::kInternetSearch});
}

TEST_CASE("run_suite is order-stable under concurrency and captures failures") {
  std::vector<EvalTask> tasks;
  for (int i = 0; i < 12; ++i) tasks.push_back({"task-" + std::to_string(10 + i), "q" + std::to_string(i), "general", {}});
  auto engine = [](const std::string& q) {
    if (q == "q3") throw std::runtime_error("engine exploded");
    auto t = turn_using(0);
    t.final_report = "answer to " + q;
    return t;
  };
  auto serial = run_suite(tasks, engine, 1);
  auto parallel = run_suite(tasks, engine, 4);
  REQUIRE(serial.size() == 12);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(serial[i].task_id == parallel[i].task_id);
    CHECK(serial[i].answer == parallel[i].answer);
  }
  CHECK(serial[3].failed);
  CHECK(serial[3].error == "engine exploded");
}

TEST_CASE("suite validation") {
  auto ok = suite_from_json(nlohmann::json::parse(
      R"({"tasks": [{"id": "a", "query": "q", "category": "diffusion+table",
                     "expected_tools": ["diffusion_model", "table_retriever"]}]})"));
  CHECK(ok.at(0).expected_tools.size() == 2);
  CHECK(is_hybrid("diffusion+table"));
  CHECK_FALSE(is_hybrid("table"));
  CHECK_THROWS_AS(suite_from_json(nlohmann::json::parse(R"([{"id": "a", "query": "q", "category": "poetry"}])")),
                  ValidationError);
  CHECK_THROWS_AS(suite_from_json(nlohmann::json::parse(
                      R"([{"id": "a", "query": "q", "category": "table", "expected_tools": ["hammer"]}])")),
                  ValidationError);
  CHECK_THROWS_AS(suite_from_json(nlohmann::json::parse(
                      R"([{"id": "a", "query": "q", "category": "diffusion+manual", "expected_tools": ["diffusion_model"]}])")),
                  ValidationError);
  CHECK_THROWS_AS(suite_from_json(nlohmann::json::parse(
                      R"([{"id": "a", "query": "q", "category": "table"}, {"id": "a", "query": "r", "category": "table"}])")),
                  ValidationError);
  CHECK_THROWS_AS(suite_from_json(nlohmann::json::parse(R"([{"id": "a", "query": "  ", "category": "table"}])")),
                  ValidationError);
  CHECK_THROWS_AS(suite_from_json(nlohmann::json::parse(R"([{"query": "q", "category": "table"}])")), ValidationError);
  CHECK(load_suite(test::data_dir() / "suites" / "desk.suite.json").size() == 20);
  CHECK(load_suite(test::data_dir() / "suites" / "hybrid.suite.json").size() == 9);
}

TEST_CASE("human scores attach by task id") {
  auto scores = human_scores_from_json(nlohmann::json::parse(R"({"a": 7, "c": 3.5})"));
  std::vector<EvalRecord> records(2);
  records[0].task_id = "a";
  records[1].task_id = "b";
  CHECK(attach_human_scores(records, scores) == 1);
  CHECK(records[0].human == 7.0);
  CHECK_FALSE(records[1].human);
  CHECK_THROWS_AS(human_scores_from_json(nlohmann::json::parse(R"({"a": 11})")), ValidationError);
  CHECK_THROWS_AS(human_scores_from_json(nlohmann::json::parse(R"({"a": "high"})")), ValidationError);
  CHECK(load_human_scores(test::data_dir() / "suites" / "desk.human.json").size() == 20);
}

TEST_CASE("write_report produces JSON and TSV") {
  const auto records = test::random_records(10, 77);
  const auto rep = aggregate(records);
  const auto dir = test::fresh_dir("report");
  write_report(rep, records, dir / "out" / "desk");
  const auto doc = test::read_json(dir / "out" / "desk.json");
  CHECK(doc["tasks"] == 10);
  CHECK(doc["records"].size() == 10);
  CHECK(doc.contains("categories"));
  std::ifstream tsv(dir / "out" / "desk.tsv");
  std::string header;
  std::getline(tsv, header);
  CHECK(header.rfind("category\ttasks\t", 0) == 0);
  std::size_t lines = 0;
  for (std::string line; std::getline(tsv, line);) ++lines;
  CHECK(lines == rep.rows.size() + 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("desk suite runs clean end to end") {
  auto engine = test::desk_engine();
  auto tasks = load_suite(test::data_dir() / "suites" / "desk.suite.json");
  auto records = run_suite(tasks, [&](const std::string& q) {
    orchestrator::ChatHistory h;
    return engine->pipeline->run_turn(q, h);
  });
  for (const auto& r : records) {
    INFO(r.task_id);
    CHECK_FALSE(r.failed);
    CHECK_FALSE(r.tool_miss);
  }
  judge_records(records, *engine->gateway, *engine->prompts);
  for (const auto& r : records) CHECK(r.judge.has_value());
  attach_human_scores(records, load_human_scores(test::data_dir() / "suites" / "desk.human.json"));
  const auto rep = aggregate(records);
  CHECK(rep.paired == 20);
  REQUIRE(rep.judge_human_pearson);
  CHECK(*rep.judge_human_pearson > 0.0);
}
