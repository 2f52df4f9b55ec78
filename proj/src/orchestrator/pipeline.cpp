// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/orchestrator/pipeline.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

#include "moldchat/common/error.hpp"
#include "moldchat/common/text.hpp"

namespace moldchat::orchestrator {

namespace {

using Clock = std::chrono::steady_clock;

llm::Seconds since(Clock::time_point start) { return Clock::now() - start; }

bool is_heading(const std::string& line, std::string_view key) {
  std::string l = text::trim(line);
  while (!l.empty() && (l.front() == '-' || l.front() == '*' || l.front() == '#')) l = text::trim(l.substr(1));
  return text::contains_icase(l, key) && l.find(':') != std::string::npos &&
         text::contains_icase(l.substr(0, l.find(':') + 1), key);
}

std::string strip_bullet(const std::string& line) {
  std::string l = text::trim(line);
  if (!l.empty() && (l.front() == '-' || l.front() == '*')) l = text::trim(l.substr(1));
  return l;
}

bool same_step(const PlanStep& a, const PlanStep& b) {
  return a.tool == b.tool && text::iequals(text::trim(a.task), text::trim(b.task));
}

struct ReactReply {
  bool final = false;
  std::string answer;
  std::string action;
  std::string action_input;
};

ReactReply parse_react(const std::string& reply) {
  ReactReply r;
  if (text::contains_icase(reply, "Final Answer:")) {
    r.final = true;
    const std::string lower = text::to_lower(reply);
    r.answer = text::trim(reply.substr(lower.find("final answer:") + 13));
    return r;
  }
  for (const auto& line : text::split_lines(reply)) {
    const std::string t = text::trim(line);
    if (text::starts_with_icase(t, "Action Input:")) {
      r.action_input = text::trim(t.substr(13));
    } else if (text::starts_with_icase(t, "Action:")) {
      r.action = text::trim(t.substr(7));
    }
  }
  if (r.action.empty()) {
    r.final = true;
    r.answer = text::trim(reply);
  }
  return r;
}

}  // namespace

std::string FormattedTask::render() const {
  if (relevant_history.empty()) return current_request;
  std::string out = current_request + "\nContext from earlier turns:";
  for (const auto& h : relevant_history) out += "\n- " + h;
  return out;
}

FormattedTask parse_formatted_task(const std::string& reply) {
  FormattedTask t;
  enum class Section { kNone, kRequest, kHistory } section = Section::kNone;
  std::vector<std::string> request_lines;
  bool saw_heading = false;
  for (const auto& line : text::split_lines(reply)) {
    if (is_heading(line, "current request")) {
      section = Section::kRequest;
      saw_heading = true;
      const std::string after = text::trim(line.substr(line.find(':') + 1));
      if (!after.empty()) request_lines.push_back(after);
      continue;
    }
    if (is_heading(line, "relevant information") || is_heading(line, "conversation history")) {
      section = Section::kHistory;
      saw_heading = true;
      continue;
    }
    const std::string item = strip_bullet(line);
    if (item.empty()) continue;
    if (section == Section::kRequest) {
      request_lines.push_back(item);
    } else if (section == Section::kHistory) {
      const std::string lower = text::to_lower(item);
      if (lower != "(none)" && lower != "none" && lower != "n/a") t.relevant_history.push_back(item);
    }
  }
  t.current_request = text::join(request_lines, " ");
  if (!saw_heading || t.current_request.empty()) t.current_request = text::trim(reply);
  return t;
}

std::string render_past_steps(const std::vector<PastStep>& past) {
  if (past.empty()) return "(none)";
  std::string out;
  for (std::size_t i = 0; i < past.size(); ++i) {
    if (i) out += "\n\n";
    out += std::to_string(i + 1) + ". " + render_step(past[i].step) + "\nResult:\n" + past[i].result;
  }
  return out;
}

Pipeline::Pipeline(llm::Gateway& gateway, std::shared_ptr<const llm::PromptLibrary> prompts,
                   std::shared_ptr<const toolbox::Toolbox> tools, PipelineConfig config)
    : gateway_(gateway), prompts_(std::move(prompts)), tools_(std::move(tools)), config_(config) {
  if (!prompts_ || !tools_) throw PreconditionError("pipeline needs prompts and tools");
  if (config_.replan_cap < 1 || config_.react_cap < 1) throw ConfigError("loop caps must be at least 1");
}

llm::CompletionRequest Pipeline::request(const std::string& stage, const std::string& prompt, double temperature,
                                         std::optional<llm::SchemaId> schema) const {
  llm::CompletionRequest req;
  req.stage_tag = stage;
  req.temperature = temperature;
  req.schema_id = schema;
  req.messages.push_back(llm::ChatMessage::user(prompt));
  return req;
}

StageRecord& Pipeline::record(TurnState& st, const std::string& stage, const llm::CompletionRequest* req,
                              const std::vector<llm::Completion>& calls, std::string raw,
                              llm::Seconds duration) const {
  StageRecord r;
  r.stage = stage;
  if (!calls.empty()) r.prompt_digest = calls.front().prompt_digest;
  if (config_.debug_prompts && req != nullptr) r.prompt = llm::prompt_text(*req);
  r.raw_output = std::move(raw);
  r.duration = duration;
  r.detail = nlohmann::json::object();
  if (!calls.empty()) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& c : calls) {
      list.push_back({{"stage_tag", c.stage_tag},
                      {"prompt_digest", c.prompt_digest},
                      {"input_tokens", c.usage.input_tokens},
                      {"output_tokens", c.usage.output_tokens},
                      {"cost", c.cost}});
    }
    r.detail["calls"] = std::move(list);
  }
  return st.trace.append(std::move(r));
}

FormattedTask Pipeline::format_task(const std::string& user_input, const ChatHistory& history,
                                    TurnState& st) const {
  const auto start = Clock::now();
  auto req = request("task_formatter",
                     prompts_->render("task_formatter", {{"conversation_history", history.render(config_.history_pairs)},
                                                         {"input", user_input}}),
                     config_.temperature);
  auto c = gateway_.complete(req, &st.meter);
  FormattedTask t = parse_formatted_task(c.text);
  if (text::trim(t.current_request).empty()) t.current_request = user_input;
  auto& rec = record(st, "format", &req, {c}, c.text, since(start));
  rec.detail["current_request"] = t.current_request;
  rec.detail["relevant_history"] = t.relevant_history;
  return t;
}

Translation Pipeline::translate(const FormattedTask& task, TurnState& st) const {
  const auto start = Clock::now();
  const std::string input = task.render();
  auto req = request("translator",
                     prompts_->render("translator", {{"format_instructions",
                                                      llm::format_instructions(llm::SchemaId::kTranslation)},
                                                     {"input", input}}),
                     config_.temperature, llm::SchemaId::kTranslation);
  auto res = gateway_.complete_structured<Translation>(req, llm::parse_translation, &st.meter);
  Translation out;
  std::vector<std::string> flags;
  if (!res.ok()) {
    spdlog::warn("translator output unparsable ({}); passing text through as English", res.error);
    out = {input, "English"};
    flags.push_back("parse_fallback");
  } else {
    out = *res.value;
    if (text::iequals(text::trim(out.language), "english")) {
      out.language = "English";
      out.translated_query = input;
    }
    if (text::trim(out.translated_query).empty()) out.translated_query = input;
  }
  auto& rec = record(st, "translate", &req, res.attempts, res.attempts.back().text, since(start));
  rec.flags = flags;
  rec.detail["language"] = out.language;
  rec.detail["translated_query"] = out.translated_query;
  return out;
}

Category Pipeline::classify(const Translation& translation, const ChatHistory& history, TurnState& st) const {
  const auto start = Clock::now();
  auto req = request("classifier",
                     prompts_->render("classifier",
                                      {{"format_instructions", llm::format_instructions(llm::SchemaId::kCategory)},
                                       {"conversation_history", history.render(config_.history_pairs)},
                                       {"input", translation.translated_query}}),
                     config_.strict_temperature, llm::SchemaId::kCategory);
  auto res = gateway_.complete_structured<Category>(req, llm::parse_category, &st.meter);
  Category c = res.ok() ? *res.value : Category::kNoInjection;
  auto& rec = record(st, "classify", &req, res.attempts, res.attempts.back().text, since(start));
  if (!res.ok()) rec.flags.push_back("parse_fallback");
  rec.detail["category"] = to_string(c);
  return c;
}

std::string Pipeline::run_react(const Translation& task, TurnState& st) const {
  std::string scratchpad;
  std::vector<std::string> observations;
  for (int round = 1; round <= config_.react_cap; ++round) {
    const auto start = Clock::now();
    auto req = request("react",
                       prompts_->render("react", {{"input", task.translated_query},
                                                  {"scratchpad", scratchpad.empty() ? "(none)" : scratchpad}}),
                       config_.temperature);
    auto c = gateway_.complete(req, &st.meter);
    std::vector<llm::Completion> calls{c};
    const ReactReply r = parse_react(c.text);
    nlohmann::json detail{{"round", round}};
    if (r.final) {
      auto& rec = record(st, "react", &req, calls, c.text, since(start));
      rec.detail.update(detail);
      rec.detail["final"] = true;
      return r.answer.empty() ? text::trim(c.text) : r.answer;
    }
    std::string observation;
    bool searched = false;
    if (tool_from_string(r.action) == ToolName::kInternetSearch && !text::trim(r.action_input).empty()) {
      searched = true;
      try {
        auto res = tools_->invoke(ToolName::kInternetSearch, r.action_input, &st.meter);
        observation = res.text;
        calls.insert(calls.end(), res.completions.begin(), res.completions.end());
        if (res.degraded) detail["degraded"] = true;
      } catch (const Error& e) {
        observation = std::string("Search failed: ") + e.what();
      }
    } else if (tool_from_string(r.action) == ToolName::kInternetSearch) {
      observation = "The search query was empty.";
    } else {
      observation = "Unknown action '" + r.action + "'. The only available action is internet_search.";
    }
    observations.push_back(observation);
    scratchpad += text::trim(c.text) + "\nObservation: " + observation + "\n";
    auto& rec = record(st, "react", &req, calls, c.text, since(start));
    rec.detail.update(detail);
    rec.detail["action"] = r.action;
    rec.detail["action_input"] = r.action_input;
    rec.detail["searched"] = searched;
    rec.detail["observation"] = observation;
  }
  st.trace.append({"react", "", "", "", llm::Seconds{0.0}, {"react_cap"}, {{"rounds", config_.react_cap}}});
  if (observations.empty()) return "I could not reach a final answer to this question.";
  return "I could not reach a final answer within the allowed steps. What I found:\n" + observations.back();
}

Plan Pipeline::planned(const std::string& stage, const llm::CompletionRequest& req, const Translation& task,
                       TurnState& st) const {
  const auto start = Clock::now();
  auto res = gateway_.complete_structured<Plan>(req, llm::parse_plan, &st.meter);
  Plan p;
  std::vector<std::string> flags;
  if (res.ok()) {
    p = *res.value;
  } else {
    spdlog::warn("{} output unusable ({}); falling back to a single llm_infer step", stage, res.error);
    p.steps.push_back({ToolName::kLlmInfer, task.translated_query});
    flags.push_back("plan_fallback");
  }
  auto& rec = record(st, stage, &req, res.attempts, res.attempts.back().text, since(start));
  rec.flags = flags;
  rec.detail["plan"] = llm::to_json(p)["steps"];
  return p;
}

Plan Pipeline::plan(const Translation& task, TurnState& st) const {
  auto req = request("planner",
                     prompts_->render("planner", {{"input", task.translated_query},
                                                  {"format_instructions",
                                                   llm::format_instructions(llm::SchemaId::kPlan)}}),
                     config_.temperature, llm::SchemaId::kPlan);
  return planned("plan", req, task, st);
}

PastStep Pipeline::execute_step(const Plan& plan, const std::vector<PastStep>& past, TurnState& st) const {
  // Skip steps of this plan that were already executed, matching one for one.
  std::vector<bool> used(past.size(), false);
  const PlanStep* next = nullptr;
  for (const auto& s : plan.steps) {
    bool done = false;
    for (std::size_t i = 0; i < past.size(); ++i) {
      if (!used[i] && same_step(past[i].step, s)) {
        used[i] = done = true;
        break;
      }
    }
    if (!done) {
      next = &s;
      break;
    }
  }
  if (next == nullptr) throw PreconditionError("plan has no unexecuted step");

  const auto start = Clock::now();
  PastStep out{*next, {}};
  std::string input = next->task;
  if (next->tool == ToolName::kLlmInfer && !past.empty()) {
    input += "\n\nResults of earlier steps:\n" + render_past_steps(past);
  }
  toolbox::ToolResult res;
  std::vector<std::string> flags;
  try {
    res = tools_->invoke(next->tool, input, &st.meter);
    out.result = res.text;
  } catch (const PreconditionError&) {
    out.result = kOutOfScope;
    flags.push_back("out_of_scope");
  } catch (const NotFoundError&) {
    out.result = kOutOfScope;
    flags.push_back("out_of_scope");
  } catch (const Error& e) {
    out.result = std::string("Tool error (") + std::string(to_string(next->tool)) + "): " + e.what();
    flags.push_back("tool_error");
  }
  if (text::trim(out.result).empty()) out.result = kOutOfScope;
  if (res.degraded) flags.push_back("degraded");
  auto& rec = record(st, "execute", nullptr, res.completions, out.result, since(start));
  rec.flags = flags;
  rec.detail["tool"] = to_string(next->tool);
  rec.detail["task"] = next->task;
  if (!res.artifacts.is_null()) rec.detail["artifacts"] = res.artifacts;
  if (!res.substages.empty()) {
    nlohmann::json subs = nlohmann::json::array();
    for (const auto& s : res.substages) subs.push_back({{"name", s.name}, {"output", s.output}});
    rec.detail["substages"] = std::move(subs);
  }
  return out;
}

Decision Pipeline::supervise(const Translation& task, const Plan& plan, const std::vector<PastStep>& past,
                             TurnState& st) const {
  if (past.empty()) throw PreconditionError("supervisor needs at least one completed step");
  const auto start = Clock::now();
  auto req = request("supervisor",
                     prompts_->render("supervisor", {{"input", task.translated_query},
                                                     {"plan", render_plan(plan)},
                                                     {"past_steps", render_past_steps(past)},
                                                     {"format_instructions",
                                                      llm::format_instructions(llm::SchemaId::kDecision)}}),
                     config_.strict_temperature, llm::SchemaId::kDecision);
  auto res = gateway_.complete_structured<Decision>(req, llm::parse_decision, &st.meter);
  Decision d = res.ok() ? *res.value : Decision::kReplan;
  auto& rec = record(st, "supervise", &req, res.attempts, res.attempts.back().text, since(start));
  if (!res.ok()) rec.flags.push_back("parse_fallback");
  rec.detail["decision"] = to_string(d);
  return d;
}

Plan Pipeline::replan(const Translation& task, const Plan& plan, const std::vector<PastStep>& past,
                      TurnState& st) const {
  auto req = request("replanner",
                     prompts_->render("replanner", {{"input", task.translated_query},
                                                    {"plan", render_plan(plan)},
                                                    {"past_steps", render_past_steps(past)},
                                                    {"format_instructions",
                                                     llm::format_instructions(llm::SchemaId::kPlan)}}),
                     config_.temperature, llm::SchemaId::kPlan);
  Plan p = planned("replan", req, task, st);
  Plan remaining;
  for (const auto& s : p.steps) {
    bool done = false;
    for (const auto& q : past) done = done || same_step(q.step, s);
    if (!done) remaining.steps.push_back(s);
  }
  if (remaining.steps.size() != p.steps.size()) {
    auto& rec = st.trace.back();
    rec.flags.push_back("dropped_completed_steps");
    rec.detail["plan"] = llm::to_json(remaining)["steps"];
  }
  return remaining;
}

std::vector<PastStep> Pipeline::run_plan_loop(const Translation& task, TurnState& st) const {
  Plan current = plan(task, st);
  int rounds = 1;
  std::vector<PastStep> past;
  while (true) {
    past.push_back(execute_step(current, past, st));
    const Decision d = supervise(task, current, past, st);
    if (d == Decision::kRespond) break;
    if (rounds >= config_.replan_cap) {
      auto& rec = st.trace.back();
      rec.flags.push_back("forced_respond");
      break;
    }
    current = replan(task, current, past, st);
    ++rounds;
    if (current.steps.empty()) {
      auto& rec = st.trace.back();
      rec.flags.push_back("no_remaining_steps");
      break;
    }
  }
  return past;
}

std::string Pipeline::report(const std::string& input_eng, const std::string& payload, const std::string& language,
                             ReportMode mode, TurnState& st) const {
  const auto start = Clock::now();
  const bool english = text::iequals(text::trim(language), "english") || text::trim(language).empty();
  if (mode == ReportMode::kGeneral && english) {
    auto& rec = record(st, "report", nullptr, {}, payload, since(start));
    rec.flags.push_back("no_translation");
    rec.detail["mode"] = "general";
    rec.detail["language"] = "English";
    return payload;
  }
  const std::string lang = english ? "English" : language;
  llm::CompletionRequest req;
  if (mode == ReportMode::kGeneral) {
    req = request("reporter", prompts_->render("reporter_general",
                                               {{"language", lang}, {"input_eng", input_eng}, {"response", payload}}),
                  config_.temperature);
  } else {
    req = request("reporter",
                  prompts_->render("reporter_injection",
                                   {{"language", lang}, {"input_eng", input_eng}, {"past_steps", payload}}),
                  config_.temperature);
  }
  std::vector<llm::Completion> calls;
  std::string out;
  std::vector<std::string> flags;
  try {
    calls.push_back(gateway_.complete(req, &st.meter));
    out = text::trim(calls.back().text);
  } catch (const Error& e) {
    spdlog::warn("reporter failed ({}); returning the English payload", e.what());
  }
  if (out.empty()) {
    out = payload;
    flags.push_back("report_fallback");
  }
  auto& rec = record(st, "report", &req, calls, out, since(start));
  rec.flags = flags;
  rec.detail["mode"] = mode == ReportMode::kGeneral ? "general" : "injection";
  rec.detail["language"] = lang;
  return out;
}

ChatTurn Pipeline::run_turn(const std::string& user_input, ChatHistory& history) const {
  const auto start = Clock::now();
  ChatTurn turn;
  turn.user_input = user_input;
  TurnState st;
  if (text::trim(user_input).empty()) {
    turn.language = "English";
    turn.final_report = "Please type a question or describe the problem you are seeing.";
    st.trace.append({"clarify", "", "", turn.final_report, llm::Seconds{0.0}, {"empty_input"}, nlohmann::json::object()});
    turn.trace = std::move(st.trace);
    turn.latency = since(start);
    return turn;
  }
  try {
    const FormattedTask task = format_task(user_input, history, st);
    const Translation tr = translate(task, st);
    turn.language = tr.language;
    const Category cat = classify(tr, history, st);
    turn.category = std::string(to_string(cat));
    if (cat == Category::kNoInjection) {
      const std::string answer = run_react(tr, st);
      turn.final_report = report(tr.translated_query, answer, tr.language, ReportMode::kGeneral, st);
    } else {
      const auto past = run_plan_loop(tr, st);
      turn.final_report =
          report(tr.translated_query, render_past_steps(past), tr.language, ReportMode::kInjection, st);
    }
  } catch (const std::exception& e) {
    spdlog::error("turn failed: {}", e.what());
    turn.failed = true;
    turn.final_report = std::string("Sorry, I could not complete this request because of an internal error (") +
                        e.what() + "). Please try again or rephrase the question.";
    st.trace.append({"error", "", "", e.what(), llm::Seconds{0.0}, {"turn_failed"}, nlohmann::json::object()});
  }
  history.append(user_input, turn.final_report);
  const auto totals = st.meter.totals();
  turn.usage = totals.usage;
  turn.cost = totals.cost;
  turn.trace = std::move(st.trace);
  turn.latency = since(start);
  return turn;
}

}  // namespace moldchat::orchestrator
