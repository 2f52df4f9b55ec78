// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/llm/schemas.hpp"

#include <cctype>
#include <cmath>

#include "moldchat/common/error.hpp"
#include "moldchat/common/text.hpp"

namespace moldchat {

std::string_view to_string(ToolName tool) {
  switch (tool) {
    case ToolName::kTableRetriever:
      return "table_retriever";
    case ToolName::kManualRetriever:
      return "manual_retriever";
    case ToolName::kInternetSearch:
      return "internet_search";
    case ToolName::kLlmInfer:
      return "llm_infer";
    case ToolName::kDiffusionModel:
      return "diffusion_model";
  }
  return "llm_infer";
}

std::optional<ToolName> tool_from_string(std::string_view name) {
  const std::string n = text::to_lower(text::trim(name));
  for (ToolName t : kAllTools) {
    if (n == to_string(t)) return t;
  }
  if (n == "lm_infer") return ToolName::kLlmInfer;
  return std::nullopt;
}

std::string_view to_string(Category c) { return c == Category::kInjection ? "injection" : "no_injection"; }

std::string_view to_string(Decision d) { return d == Decision::kRespond ? "respond" : "replan"; }

std::string render_step(const PlanStep& step) {
  return "(" + std::string(to_string(step.tool)) + ", " + step.task + ")";
}

std::string render_plan(const Plan& plan) {
  std::string out = "[";
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    if (i) out += ",\n ";
    out += render_step(plan.steps[i]);
  }
  return out + "]";
}

std::vector<std::string> DiffusionInputs::missing_environment() const {
  std::vector<std::string> out;
  if (!machine_temperature) out.emplace_back("machine temperature");
  if (!machine_humidity) out.emplace_back("machine humidity");
  if (!factory_temperature) out.emplace_back("factory temperature");
  if (!factory_humidity) out.emplace_back("factory humidity");
  return out;
}

}  // namespace moldchat

namespace moldchat::llm {

namespace {

std::string strip_decoration(std::string_view s) {
  std::string t = text::trim(s);
  auto strip = [](char c) {
    return c == '"' || c == '\'' || c == '`' || c == '*' || c == '.' || c == ',' || c == ':' ||
           c == '[' || c == ']' || c == '(' || c == ')';
  };
  std::size_t b = 0;
  std::size_t e = t.size();
  while (b < e && (strip(t[b]) || std::isspace(static_cast<unsigned char>(t[b])))) ++b;
  while (e > b && (strip(t[e - 1]) || std::isspace(static_cast<unsigned char>(t[e - 1])))) --e;
  return text::to_lower(t.substr(b, e - b));
}

/// Lenient literal extraction: JSON field, bare literal, "key: literal",
/// quoted literal, or a line that is only the literal. Anything else fails.
std::string parse_literal(const std::string& text, const std::string& key,
                          const std::vector<std::string>& literals) {
  auto is_literal = [&](const std::string& v) {
    for (const auto& lit : literals) {
      if (v == lit) return true;
    }
    return false;
  };

  if (auto obj = text::find_json_object(text)) {
    if (obj->contains(key) && (*obj)[key].is_string()) {
      const std::string v = strip_decoration((*obj)[key].get<std::string>());
      if (is_literal(v)) return v;
      throw ParseError("'" + key + "' value '" + v + "' is not an allowed literal", text);
    }
  }

  if (const std::string whole = strip_decoration(text); is_literal(whole)) return whole;

  const std::string lower = text::to_lower(text);
  if (auto pos = lower.find(key + ":"); pos != std::string::npos) {
    std::size_t i = pos + key.size() + 1;
    std::size_t end = lower.find('\n', i);
    const std::string v = strip_decoration(lower.substr(i, end == std::string::npos ? std::string::npos : end - i));
    if (is_literal(v)) return v;
  }

  // Earliest quoted occurrence wins.
  std::size_t best = std::string::npos;
  std::string best_lit;
  for (const auto& lit : literals) {
    for (const char* q : {"\"", "'", "`", "**"}) {
      const std::string needle = std::string(q) + lit + q;
      if (auto pos = lower.find(needle); pos != std::string::npos && pos < best) {
        best = pos;
        best_lit = lit;
      }
    }
  }
  if (best != std::string::npos) return best_lit;

  for (const auto& line : text::split_lines(text)) {
    if (const std::string v = strip_decoration(line); is_literal(v)) return v;
  }
  throw ParseError("no allowed literal for '" + key + "' found", text);
}

std::optional<double> json_number(const nlohmann::json& v, const std::string& key, const std::string& raw) {
  if (v.is_null()) return std::nullopt;
  if (v.is_number()) {
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ParseError("non-finite value for '" + key + "'", raw);
    return d;
  }
  if (v.is_string()) {
    const std::string s = text::to_lower(text::trim(v.get<std::string>()));
    if (s.empty() || s == "none" || s == "null" || s == "n/a" || s == "unknown") return std::nullopt;
    const auto nums = text::extract_numbers(s);
    if (nums.size() == 1) return nums.front();
  }
  throw ParseError("value for '" + key + "' is neither a number nor None", raw);
}

PlanStep parse_step_string(const std::string& raw_step, const std::string& raw) {
  std::string s = text::trim(raw_step);
  while (!s.empty() && (s.front() == '(' || s.front() == '[' || s.front() == '"' || s.front() == '\'')) s.erase(0, 1);
  while (!s.empty() && (s.back() == ')' || s.back() == ']' || s.back() == '"' || s.back() == '\'' || s.back() == ',')) {
    s.pop_back();
  }
  std::size_t cut = s.find(',');
  for (std::string_view sep : {"→", "->", ":"}) {
    if (auto pos = s.find(sep); pos != std::string::npos && pos < cut) cut = pos;
  }
  if (cut == std::string::npos) throw ParseError("step '" + raw_step + "' is not a (tool, task) pair", raw);
  std::string tool = text::trim(s.substr(0, cut));
  std::size_t task_start = cut + 1;
  if (s.compare(cut, 3, "→") == 0) task_start = cut + 3;
  if (s.compare(cut, 2, "->") == 0) task_start = cut + 2;
  std::string task = text::trim(s.substr(task_start));
  auto unquote = [](std::string v) {
    v = text::trim(v);
    while (!v.empty() && (v.front() == '"' || v.front() == '\'' || v.front() == '`')) v.erase(0, 1);
    while (!v.empty() && (v.back() == '"' || v.back() == '\'' || v.back() == '`')) v.pop_back();
    return text::trim(v);
  };
  tool = unquote(tool);
  task = unquote(task);
  auto t = tool_from_string(tool);
  if (!t) throw ParseError("unknown tool '" + tool + "' in plan", raw);
  if (task.empty()) throw ParseError("empty task for tool '" + tool + "'", raw);
  return PlanStep{*t, task};
}

PlanStep parse_step_json(const nlohmann::json& step, const std::string& raw) {
  if (step.is_string()) return parse_step_string(step.get<std::string>(), raw);
  if (step.is_array() && step.size() == 2 && step[0].is_string() && step[1].is_string()) {
    auto t = tool_from_string(step[0].get<std::string>());
    if (!t) throw ParseError("unknown tool '" + step[0].get<std::string>() + "' in plan", raw);
    const std::string task = text::trim(step[1].get<std::string>());
    if (task.empty()) throw ParseError("empty task in plan step", raw);
    return PlanStep{*t, task};
  }
  if (step.is_object()) {
    const std::string tool = step.value("tool", step.value("Tool to be used", std::string{}));
    const std::string task = step.value("task", step.value("Task description", std::string{}));
    auto t = tool_from_string(tool);
    if (!t) throw ParseError("unknown tool '" + tool + "' in plan", raw);
    if (text::trim(task).empty()) throw ParseError("empty task in plan step", raw);
    return PlanStep{*t, text::trim(task)};
  }
  throw ParseError("unrecognised plan step " + step.dump(), raw);
}

}  // namespace

std::string format_instructions(SchemaId schema) {
  switch (schema) {
    case SchemaId::kTranslation:
      return "Return only a JSON object with exactly two keys:\n"
             "{\"translated_query\": \"<the input query in English>\", "
             "\"language\": \"<the original language of the input query, e.g. English, Korean>\"}";
    case SchemaId::kCategory:
      return "Return only a JSON object: {\"category\": \"injection\"} or {\"category\": \"no_injection\"}";
    case SchemaId::kPlan:
      return "Return only a JSON object of the form\n"
             "{\"steps\": [[\"<tool>\", \"<task description>\"], [\"<tool>\", \"<task description>\"]]}\n"
             "where <tool> is one of table_retriever, manual_retriever, internet_search, llm_infer, "
             "diffusion_model. Steps must be ordered sequentially.";
    case SchemaId::kDecision:
      return "Return only a JSON object: {\"decision\": \"replan\"} or {\"decision\": \"respond\"}";
    case SchemaId::kDiffusionInputs:
      return "Return only a JSON object with exactly these keys:\n"
             "{\"machine_temperature\": <number or null>, \"machine_humidity\": <number or null>, "
             "\"factory_temperature\": <number or null>, \"factory_humidity\": <number or null>, "
             "\"class\": <0, 1 or null>}";
    case SchemaId::kJudgeScore:
      return "Format:\nRelevance: ...\nAccuracy: ...\nRating: <integer from 0 to 10>";
  }
  return {};
}

Translation parse_translation(const std::string& text) {
  auto obj = text::find_json_object(text);
  if (!obj) throw ParseError("translation reply contains no JSON object", text);
  if (!obj->contains("translated_query") || !(*obj)["translated_query"].is_string()) {
    throw ParseError("translation reply lacks 'translated_query'", text);
  }
  if (!obj->contains("language") || !(*obj)["language"].is_string()) {
    throw ParseError("translation reply lacks 'language'", text);
  }
  Translation t{text::trim((*obj)["translated_query"].get<std::string>()),
                text::trim((*obj)["language"].get<std::string>())};
  if (t.translated_query.empty() || t.language.empty()) throw ParseError("empty translation field", text);
  return t;
}

Category parse_category(const std::string& text) {
  return parse_literal(text, "category", {"no_injection", "injection"}) == "injection" ? Category::kInjection
                                                                                        : Category::kNoInjection;
}

Decision parse_decision(const std::string& text) {
  return parse_literal(text, "decision", {"respond", "replan"}) == "respond" ? Decision::kRespond
                                                                             : Decision::kReplan;
}

Plan parse_plan(const std::string& text) {
  Plan plan;
  if (auto obj = text::find_json_object(text); obj && obj->contains("steps")) {
    const auto& steps = (*obj)["steps"];
    if (!steps.is_array()) throw ParseError("'steps' must be a list", text);
    for (const auto& s : steps) plan.steps.push_back(parse_step_json(s, text));
  } else {
    // Numbered or bulleted "(tool, task)" lines.
    for (const auto& line : text::split_lines(text)) {
      std::string l = text::trim(line);
      std::size_t i = 0;
      while (i < l.size() && (std::isdigit(static_cast<unsigned char>(l[i])) || l[i] == '.' || l[i] == '-' ||
                              l[i] == '*' || l[i] == ')' || l[i] == ' ')) {
        ++i;
      }
      l = l.substr(i);
      if (l.empty()) continue;
      const std::string probe = strip_decoration(l.substr(0, l.find_first_of(",:→-")));
      if (!tool_from_string(probe)) continue;
      plan.steps.push_back(parse_step_string(l, text));
    }
  }
  if (plan.steps.empty()) throw ParseError("plan has no steps", text);
  return plan;
}

DiffusionInputs parse_diffusion_inputs(const std::string& text) {
  auto obj = text::find_json_object(text);
  if (!obj) throw ParseError("diffusion input reply contains no JSON object", text);
  DiffusionInputs in;
  int recognised = 0;
  for (const auto& [raw_key, value] : obj->items()) {
    std::string key = text::to_lower(text::trim(raw_key));
    key = key.substr(0, key.find_first_of(" ("));
    if (key == "machine_temperature") {
      in.machine_temperature = json_number(value, key, text);
    } else if (key == "machine_humidity") {
      in.machine_humidity = json_number(value, key, text);
    } else if (key == "factory_temperature") {
      in.factory_temperature = json_number(value, key, text);
    } else if (key == "factory_humidity") {
      in.factory_humidity = json_number(value, key, text);
    } else if (key == "class") {
      auto c = json_number(value, key, text);
      if (c) {
        if (*c != 0.0 && *c != 1.0) throw ParseError("class must be 0, 1 or None", text);
        in.product_class = static_cast<int>(*c);
      }
    } else {
      continue;
    }
    ++recognised;
  }
  if (recognised == 0) throw ParseError("diffusion input reply has none of the five keys", text);
  return in;
}

JudgeScore parse_judge_score(const std::string& text) {
  const std::string lower = text::to_lower(text);
  auto section = [&](const std::string& label) -> std::string {
    auto pos = lower.find(label + ":");
    if (pos == std::string::npos) return {};
    std::size_t start = pos + label.size() + 1;
    std::size_t end = lower.find('\n', start);
    for (const char* next : {"accuracy:", "rating:", "relevance:"}) {
      auto p = lower.find(next, start);
      if (p != std::string::npos && p < end) end = p;
    }
    std::string v = text::trim(text.substr(start, end == std::string::npos ? std::string::npos : end - start));
    while (!v.empty() && v.front() == '*') v.erase(0, 1);
    while (!v.empty() && v.back() == '*') v.pop_back();
    return text::trim(v);
  };

  auto pos = lower.find("rating");
  if (pos == std::string::npos) throw ParseError("judge reply has no Rating line", text);
  std::size_t i = pos + 6;
  while (i < text.size() && !std::isdigit(static_cast<unsigned char>(text[i])) && text[i] != '\n') {
    if (text[i] == '-' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
      throw ParseError("judge rating is negative", text);
    }
    ++i;
  }
  if (i >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i]))) {
    throw ParseError("judge Rating line has no number", text);
  }
  std::size_t j = i;
  while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
  long whole = std::stol(text.substr(i, j - i));
  if (j + 1 < text.size() && text[j] == '.' && std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
    std::size_t k = j + 1;
    while (k < text.size() && text[k] == '0') ++k;
    if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
      throw ParseError("judge rating must be an integer", text);
    }
    j = k;
  }
  if (j < text.size() && (text[j] == '~' || (text[j] == '-' && j + 1 < text.size() &&
                                              std::isdigit(static_cast<unsigned char>(text[j + 1]))))) {
    throw ParseError("judge reply echoes the rating range instead of a score", text);
  }
  if (whole < 0 || whole > 10) throw ParseError("judge rating " + std::to_string(whole) + " outside 0-10", text);
  return JudgeScore{section("relevance"), section("accuracy"), static_cast<int>(whole)};
}

nlohmann::json to_json(const Plan& plan) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : plan.steps) steps.push_back({std::string(to_string(s.tool)), s.task});
  return {{"steps", steps}};
}

nlohmann::json to_json(const DiffusionInputs& in) {
  auto opt = [](const auto& v) -> nlohmann::json { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"machine_temperature", opt(in.machine_temperature)},
          {"machine_humidity", opt(in.machine_humidity)},
          {"factory_temperature", opt(in.factory_temperature)},
          {"factory_humidity", opt(in.factory_humidity)},
          {"class", opt(in.product_class)}};
}

nlohmann::json parse_structured(const std::string& text, SchemaId schema) {
  switch (schema) {
    case SchemaId::kTranslation: {
      auto t = parse_translation(text);
      return {{"translated_query", t.translated_query}, {"language", t.language}};
    }
    case SchemaId::kCategory:
      return {{"category", std::string(to_string(parse_category(text)))}};
    case SchemaId::kPlan:
      return to_json(parse_plan(text));
    case SchemaId::kDecision:
      return {{"decision", std::string(to_string(parse_decision(text)))}};
    case SchemaId::kDiffusionInputs:
      return to_json(parse_diffusion_inputs(text));
    case SchemaId::kJudgeScore: {
      auto s = parse_judge_score(text);
      return {{"relevance", s.relevance_comment}, {"accuracy", s.accuracy_comment}, {"rating", s.rating}};
    }
  }
  throw PreconditionError("unregistered schema");
}

}  // namespace moldchat::llm
