// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sys/wait.h>

#include "support.hpp"

namespace fs = std::filesystem;
using namespace moldchat;

namespace {

struct Run {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(MOLDCHAT_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = ::pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("training and fitting from the command line are reproducible") {
  const auto dir = test::fresh_dir("cli-train");
  auto synth = run_cli("synth-data --rows 300 --seed 5 --out " + q(dir / "a.tsv"));
  INFO(synth.output);
  REQUIRE(synth.exit_code == 0);
  REQUIRE(run_cli("synth-data --rows 300 --seed 5 --out " + q(dir / "b.tsv")).exit_code == 0);
  REQUIRE(run_cli("synth-data --rows 300 --seed 6 --out " + q(dir / "c.tsv")).exit_code == 0);
  CHECK(slurp(dir / "a.tsv") == slurp(dir / "b.tsv"));
  CHECK(slurp(dir / "a.tsv") != slurp(dir / "c.tsv"));

  const std::string train = "train-diffusion --data " + q(dir / "a.tsv") +
                            " --steps 50 --scaled-beta --epochs 3 --hidden 16 --layers 2 --seed 11 --out ";
  auto first = run_cli(train + q(dir / "m1.json"));
  INFO(first.output);
  REQUIRE(first.exit_code == 0);
  REQUIRE(run_cli(train + q(dir / "m2.json")).exit_code == 0);
  CHECK(slurp(dir / "m1.json") == slurp(dir / "m2.json"));
  CHECK(slurp(dir / "m1.json").find("\"schedule\":{\"T\":50") != std::string::npos);

  const std::string fit = "fit-surrogate --data " + q(dir / "a.tsv") + " --trees 20 --depth 3 --out ";
  auto fitted = run_cli(fit + q(dir / "s1.json"));
  INFO(fitted.output);
  REQUIRE(fitted.exit_code == 0);
  REQUIRE(run_cli(fit + q(dir / "s2.json")).exit_code == 0);
  CHECK(slurp(dir / "s1.json") == slurp(dir / "s2.json"));

  auto sampled = run_cli("sample --checkpoint " + q(dir / "m1.json") + " --surrogate " + q(dir / "s1.json") +
                         " --machine-temp 22 --machine-hum 40 --factory-temp 24 --factory-hum 45 --n 8 --seed 2 --json");
  INFO(sampled.output);
  REQUIRE(sampled.exit_code == 0);
  const auto doc = nlohmann::json::parse(sampled.output);
  const auto scores = doc["scores"].get<std::vector<double>>();
  REQUIRE(scores.size() == 8);
  CHECK(doc["candidates"].size() == 8);
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  CHECK(doc["best_index"] == best);
  CHECK(doc["best"] == doc["candidates"][best]);
  fs::remove_all(dir);
}

TEST_CASE("eval-run writes the report for the desk suite") {
  const auto dir = test::fresh_dir("cli-eval");
  const auto suite = test::data_dir() / "suites" / "desk.suite.json";
  auto r = run_cli("eval-run --config " + q(test::data_dir() / "desk.config.json") + " --suite " + q(suite) +
                   " --human " + q(test::data_dir() / "suites" / "desk.human.json") + " --concurrency 2 --out " +
                   q(dir / "report"));
  INFO(r.output);
  REQUIRE(r.exit_code == 0);
  const auto report = test::read_json(dir / "report.json");
  CHECK(report.is_object());
  CHECK(fs::exists(dir / "report.tsv"));
  CHECK(r.output.find("wrote ") != std::string::npos);

  auto again = run_cli("eval-run --suite " + q(suite) + " --no-judge --out " + q(dir / "plain"));
  CHECK(again.exit_code == 0);
  fs::remove_all(dir);
}

TEST_CASE("bad configuration exits nonzero with a diagnostic") {
  const auto dir = test::fresh_dir("cli-bad");
  auto missing = run_cli("eval-run --config " + q(dir / "none.json") + " --suite " +
                         q(test::data_dir() / "suites" / "desk.suite.json"));
  CHECK(missing.exit_code != 0);
  CHECK(missing.output.find("none.json") != std::string::npos);

  auto cfg = test::read_json(test::data_dir() / "desk.config.json");
  cfg["checkpoint"] = (dir / "absent.ckpt.json").string();
  cfg["search_provider"] = "bing";
  cfg["prompts_dir"] = (test::prompts_dir()).string();
  nlohmann::json fixtures = nlohmann::json::array();
  for (const auto& p : cfg["fixtures"]) fixtures.push_back((test::data_dir() / p.get<std::string>()).string());
  cfg["fixtures"] = fixtures;
  {
    std::ofstream out(dir / "bad.json");
    out << cfg.dump();
  }
  auto bad = run_cli("eval-run --config " + q(dir / "bad.json") + " --suite " +
                     q(test::data_dir() / "suites" / "desk.suite.json") + " --out " + q(dir / "r"));
  INFO(bad.output);
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("error: ") != std::string::npos);
  CHECK(bad.output.find("absent.ckpt.json") != std::string::npos);
  CHECK(bad.output.find("bing") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "r.json"));

  CHECK(run_cli("").exit_code != 0);
  CHECK(run_cli("train-diffusion --out x.json").exit_code != 0);
  CHECK(run_cli("sample --checkpoint " + q(dir / "none.json")).exit_code != 0);
  fs::remove_all(dir);
}

TEST_CASE("ingest builds both vector stores") {
  const auto dir = test::fresh_dir("cli-ingest");
  const auto k = test::data_dir() / "knowledge";
  auto r = run_cli("ingest --directions " + q(k / "table_directions.csv") + " --priorities " +
                   q(k / "table_priorities.csv") + " --manual " + q(k / "manual_pages.jsonl") + " --out-dir " + q(dir));
  INFO(r.output);
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("table: 16 chunks") != std::string::npos);
  CHECK(r.output.find("manual: 22 pages") != std::string::npos);
  CHECK(fs::exists(dir / "table.mcvs"));
  CHECK(fs::exists(dir / "manual.mcvs"));
  CHECK(run_cli("ingest --out-dir " + q(dir)).exit_code == 1);
  fs::remove_all(dir);
}
