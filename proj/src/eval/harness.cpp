// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/eval/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "moldchat/common/error.hpp"
#include "moldchat/common/text.hpp"

namespace moldchat::eval {

namespace {

nlohmann::json tool_list(const std::set<ToolName>& tools) {
  nlohmann::json out = nlohmann::json::array();
  for (auto t : tools) out.push_back(to_string(t));
  return out;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace

bool is_hybrid(std::string_view category) { return category.find('+') != std::string_view::npos; }

std::vector<EvalTask> suite_from_json(const nlohmann::json& doc) {
  const nlohmann::json& list = doc.is_object() && doc.contains("tasks") ? doc.at("tasks") : doc;
  if (!list.is_array()) throw ValidationError("suite must be a list of tasks");
  std::vector<EvalTask> tasks;
  std::set<std::string> ids;
  for (const auto& j : list) {
    EvalTask t;
    try {
      t.id = j.at("id").get<std::string>();
      t.query = j.at("query").get<std::string>();
      t.category = j.at("category").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("suite task is missing id, query or category: ") + e.what());
    }
    if (std::find(kCategories.begin(), kCategories.end(), t.category) == kCategories.end()) {
      throw ValidationError("task " + t.id + " has unknown category '" + t.category + "'");
    }
    for (const auto& name : j.value("expected_tools", nlohmann::json::array())) {
      auto tool = tool_from_string(name.get<std::string>());
      if (!tool) throw ValidationError("task " + t.id + " expects unknown tool " + name.dump());
      t.expected_tools.insert(*tool);
    }
    if (is_hybrid(t.category) && t.expected_tools.size() < 2) {
      throw ValidationError("hybrid task " + t.id + " must expect at least two tools");
    }
    if (text::trim(t.query).empty()) throw ValidationError("task " + t.id + " has an empty query");
    if (!ids.insert(t.id).second) throw ValidationError("duplicate task id " + t.id);
    tasks.push_back(std::move(t));
  }
  return tasks;
}

std::vector<EvalTask> load_suite(const std::filesystem::path& path) { return suite_from_json(read_json(path)); }

nlohmann::json EvalRecord::to_json() const {
  nlohmann::json j{{"task_id", task_id},
                   {"category", category},
                   {"query", query},
                   {"answer", answer},
                   {"language", language},
                   {"expected_tools", tool_list(expected_tools)},
                   {"tools_used", tool_list(tools_used)},
                   {"stages", stages},
                   {"latency_s", latency.count()},
                   {"input_tokens", usage.input_tokens},
                   {"output_tokens", usage.output_tokens},
                   {"cost", cost},
                   {"failed", failed},
                   {"error", error},
                   {"tool_miss", tool_miss},
                   {"judge_error", judge_error}};
  j["judge"] = judge ? nlohmann::json{{"relevance", judge->relevance_comment},
                                      {"accuracy", judge->accuracy_comment},
                                      {"rating", judge->rating}}
                     : nlohmann::json(nullptr);
  j["human"] = human ? nlohmann::json(*human) : nlohmann::json(nullptr);
  return j;
}

std::set<ToolName> tools_used(const orchestrator::TurnTrace& trace) {
  std::set<ToolName> out;
  for (const auto& s : trace.stages()) {
    if (s.stage == "execute" && s.detail.contains("tool")) {
      if (auto t = tool_from_string(s.detail.at("tool").get<std::string>())) out.insert(*t);
    } else if (s.stage == "react" && s.detail.value("searched", false)) {
      out.insert(ToolName::kInternetSearch);
    }
  }
  return out;
}

std::vector<EvalRecord> run_suite(const std::vector<EvalTask>& tasks, const ChatEngine& engine,
                                  std::size_t concurrency) {
  std::vector<EvalRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
      const auto& t = tasks[i];
      EvalRecord r;
      r.task_id = t.id;
      r.category = t.category;
      r.query = t.query;
      r.expected_tools = t.expected_tools;
      try {
        auto turn = engine(t.query);
        r.answer = turn.final_report;
        r.language = turn.language;
        r.tools_used = tools_used(turn.trace);
        r.stages = turn.trace.stage_names();
        r.latency = turn.latency;
        r.usage = turn.usage;
        r.cost = turn.cost;
        r.failed = turn.failed;
        if (turn.failed && !turn.trace.stages().empty()) r.error = turn.trace.stages().back().raw_output;
      } catch (const std::exception& e) {
        r.failed = true;
        r.error = e.what();
      }
      r.tool_miss = !std::includes(r.tools_used.begin(), r.tools_used.end(), r.expected_tools.begin(),
                                   r.expected_tools.end());
      records[i] = std::move(r);
    }
  };
  const std::size_t n = std::max<std::size_t>(1, std::min(concurrency, tasks.size()));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const EvalRecord& a, const EvalRecord& b) { return a.task_id < b.task_id; });
  return records;
}

JudgeScore judge(const std::string& question, const std::string& answer, llm::Gateway& gateway,
                 const llm::PromptLibrary& prompts, llm::UsageMeter* scoped) {
  llm::CompletionRequest req;
  req.stage_tag = "judge";
  req.temperature = 0.0;
  req.schema_id = llm::SchemaId::kJudgeScore;
  req.messages.push_back(llm::ChatMessage::user(
      prompts.render("judge", {{"question", question},
                               {"answer", answer},
                               {"format_instructions", llm::format_instructions(llm::SchemaId::kJudgeScore)}})));
  auto res = gateway.complete_structured<JudgeScore>(req, llm::parse_judge_score, scoped);
  if (!res.ok()) throw ParseError(res.error, res.attempts.back().text);
  return *res.value;
}

void judge_records(std::vector<EvalRecord>& records, llm::Gateway& gateway, const llm::PromptLibrary& prompts) {
  for (auto& r : records) {
    if (r.answer.empty()) continue;
    try {
      r.judge = judge(r.query, r.answer, gateway, prompts);
    } catch (const Error& e) {
      r.judge_error = e.what();
    }
  }
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw PreconditionError("pearson needs equal-length inputs");
  if (xs.size() < 2) throw PreconditionError("pearson needs at least two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericError("correlation is undefined for a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::map<std::string, double> human_scores_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("human score file must map task ids to scores");
  std::map<std::string, double> out;
  for (const auto& [id, v] : doc.items()) {
    if (!v.is_number()) throw ValidationError("human score for " + id + " is not a number");
    const double s = v.get<double>();
    if (s < 0.0 || s > 10.0) throw ValidationError("human score for " + id + " outside 0-10");
    out[id] = s;
  }
  return out;
}

std::map<std::string, double> load_human_scores(const std::filesystem::path& path) {
  return human_scores_from_json(read_json(path));
}

std::size_t attach_human_scores(std::vector<EvalRecord>& records, const std::map<std::string, double>& scores) {
  std::size_t n = 0;
  for (auto& r : records) {
    if (auto it = scores.find(r.task_id); it != scores.end()) {
      r.human = it->second;
      ++n;
    }
  }
  return n;
}

SuiteReport aggregate(const std::vector<EvalRecord>& records) {
  SuiteReport rep;
  std::map<std::string, std::vector<const EvalRecord*>> groups;
  for (const auto& r : records) groups[r.category].push_back(&r);
  double latency_sum = 0.0;
  std::vector<double> judged;
  std::vector<double> human;
  for (const auto& [cat, list] : groups) {
    CategoryRow row;
    row.category = cat;
    row.tasks = list.size();
    double rating_sum = 0.0;
    double lat = 0.0;
    std::size_t misses = 0;
    for (const auto* r : list) {
      if (r->judge) {
        rating_sum += r->judge->rating;
        ++row.rated;
      }
      lat += r->latency.count();
      row.total_cost += r->cost;
      row.usage += r->usage;
      misses += r->tool_miss ? 1 : 0;
      row.failures += r->failed ? 1 : 0;
      if (r->judge && r->human) {
        judged.push_back(r->judge->rating);
        human.push_back(*r->human);
      }
    }
    if (row.rated > 0) {
      row.mean_rating = rating_sum / static_cast<double>(row.rated);
      double ss = 0.0;
      for (const auto* r : list) {
        if (r->judge) ss += (r->judge->rating - row.mean_rating) * (r->judge->rating - row.mean_rating);
      }
      row.std_rating = std::sqrt(ss / static_cast<double>(row.rated));
    }
    row.mean_latency_s = lat / static_cast<double>(row.tasks);
    row.mean_cost = row.total_cost / static_cast<double>(row.tasks);
    row.tool_miss_rate = static_cast<double>(misses) / static_cast<double>(row.tasks);
    rep.tasks += row.tasks;
    rep.total_cost += row.total_cost;
    latency_sum += lat;
    rep.rows.push_back(std::move(row));
  }
  if (rep.tasks > 0) rep.mean_latency_s = latency_sum / static_cast<double>(rep.tasks);
  rep.paired = judged.size();
  if (judged.size() >= 2) {
    try {
      rep.judge_human_pearson = pearson(judged, human);
    } catch (const NumericError&) {
      // Constant series: correlation undefined, left empty.
    }
  }
  return rep;
}

nlohmann::json SuiteReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"category", r.category},
                         {"tasks", r.tasks},
                         {"rated", r.rated},
                         {"mean_rating", r.mean_rating},
                         {"std_rating", r.std_rating},
                         {"mean_latency_s", r.mean_latency_s},
                         {"mean_cost", r.mean_cost},
                         {"total_cost", r.total_cost},
                         {"tool_miss_rate", r.tool_miss_rate},
                         {"failures", r.failures},
                         {"input_tokens", r.usage.input_tokens},
                         {"output_tokens", r.usage.output_tokens}});
  }
  return {{"tasks", tasks},
          {"total_cost", total_cost},
          {"mean_latency_s", mean_latency_s},
          {"paired", paired},
          {"judge_human_pearson",
           judge_human_pearson ? nlohmann::json(*judge_human_pearson) : nlohmann::json(nullptr)},
          {"categories", rows_json}};
}

std::string SuiteReport::to_tsv() const {
  std::ostringstream out;
  out << "category\ttasks\trated\tmean_rating\tstd_rating\tmean_latency_s\tmean_cost\ttotal_cost\ttool_miss_rate\t"
         "failures\n";
  for (const auto& r : rows) {
    out << r.category << '\t' << r.tasks << '\t' << r.rated << '\t' << text::fixed(r.mean_rating, 3) << '\t'
        << text::fixed(r.std_rating, 3) << '\t' << text::fixed(r.mean_latency_s, 3) << '\t'
        << text::fixed(r.mean_cost, 6) << '\t' << text::fixed(r.total_cost, 6) << '\t'
        << text::fixed(r.tool_miss_rate, 3) << '\t' << r.failures << '\n';
  }
  out << "TOTAL\t" << tasks << "\t\t\t\t" << text::fixed(mean_latency_s, 3) << "\t\t" << text::fixed(total_cost, 6)
      << "\t\t\n";
  return out.str();
}

void write_report(const SuiteReport& report, const std::vector<EvalRecord>& records,
                  const std::filesystem::path& stem) {
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  nlohmann::json doc = report.to_json();
  doc["records"] = nlohmann::json::array();
  for (const auto& r : records) doc["records"].push_back(r.to_json());
  auto json_path = stem;
  json_path += ".json";
  auto tsv_path = stem;
  tsv_path += ".tsv";
  std::ofstream j(json_path, std::ios::trunc);
  std::ofstream t(tsv_path, std::ios::trunc);
  if (!j || !t) throw IoError("cannot write report files next to " + stem.string());
  j << doc.dump(2) << '\n';
  t << report.to_tsv();
}

}  // namespace moldchat::eval
