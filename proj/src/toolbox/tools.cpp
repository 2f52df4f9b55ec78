// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/toolbox/tools.hpp"

#include <chrono>
#include <cmath>

#include <spdlog/spdlog.h>

#include "moldchat/common/error.hpp"
#include "moldchat/common/text.hpp"

namespace moldchat::toolbox {

namespace {

using Clock = std::chrono::steady_clock;

llm::Seconds since(Clock::time_point start) { return Clock::now() - start; }

bool traceable(double value, const std::vector<double>& numbers) {
  for (double n : numbers) {
    if (std::abs(n - value) <= 1e-9 * std::max(1.0, std::abs(value))) return true;
  }
  return false;
}

std::string fmt_reading(double v) { return text::fixed(v, 1); }

}  // namespace

FormattedDiffusionInputs format_diffusion_input(llm::Gateway& gateway, const llm::PromptLibrary& prompts,
                                                const std::string& subtask, llm::UsageMeter* scoped) {
  FormattedDiffusionInputs out;
  llm::CompletionRequest req;
  req.stage_tag = "diffusion_formatter";
  req.schema_id = llm::SchemaId::kDiffusionInputs;
  req.messages.push_back(llm::ChatMessage::user(prompts.render(
      "diffusion_formatter",
      {{"format_instructions", llm::format_instructions(llm::SchemaId::kDiffusionInputs)}, {"input", subtask}})));
  auto result = gateway.complete_structured<DiffusionInputs>(req, llm::parse_diffusion_inputs, scoped);
  out.completions = result.attempts;
  if (!result.ok()) {
    spdlog::warn("diffusion input formatter failed ({}); treating every input as missing", result.error);
    out.fallback = true;
    return out;
  }
  out.inputs = *result.value;
  const auto numbers = text::extract_numbers(subtask);
  auto guard = [&](std::optional<double>& field, const char* name) {
    if (field && !traceable(*field, numbers)) {
      spdlog::warn("diffusion formatter produced {}={} which the request does not state; dropped", name, *field);
      out.dropped.emplace_back(name);
      field.reset();
    }
  };
  guard(out.inputs.machine_temperature, "machine temperature");
  guard(out.inputs.machine_humidity, "machine humidity");
  guard(out.inputs.factory_temperature, "factory temperature");
  guard(out.inputs.factory_humidity, "factory humidity");
  if (!out.inputs.product_class) out.inputs.product_class = 0;
  return out;
}

std::string missing_fields_report(const std::vector<std::string>& missing) {
  return "Cannot generate process conditions yet. Missing input(s): " + text::join(missing, ", ") +
         ". Please provide the " + text::join(missing, ", ") +
         " so that all four environment readings (machine temperature, machine humidity, factory temperature, "
         "factory humidity) are known.";
}

ToolResult run_diffusion_tool(const DiffusionInputs& inputs, const diffusion::DiffusionModel* model,
                              const surrogate::Scorer* scorer, const DiffusionToolConfig& config) {
  const auto start = Clock::now();
  ToolResult r;
  r.tool = ToolName::kDiffusionModel;
  const auto missing = inputs.missing_environment();
  if (!missing.empty()) {
    r.text = missing_fields_report(missing);
    r.artifacts = {{"missing", missing}};
    r.elapsed = since(start);
    return r;
  }
  if (model == nullptr) throw ToolUnavailableError("diffusion model checkpoint is not loaded");
  if (scorer == nullptr) throw ToolUnavailableError("surrogate model is not loaded");

  diffusion::EnvCondition cond;
  cond.product_class = inputs.product_class.value_or(0) == 1 ? diffusion::ProductClass::kDefective
                                                             : diffusion::ProductClass::kGood;
  cond.machine_temperature = *inputs.machine_temperature;
  cond.machine_humidity = *inputs.machine_humidity;
  cond.factory_temperature = *inputs.factory_temperature;
  cond.factory_humidity = *inputs.factory_humidity;

  std::string prefix;
  const auto violations = config.bounds.violations(cond);
  if (!violations.empty()) {
    prefix += "Warning: " + text::join(violations, ", ") +
              " outside the expected range (temperature " + fmt_reading(config.bounds.temperature_min) + " to " +
              fmt_reading(config.bounds.temperature_max) +
              " C, humidity 0 to 100 %); the recommendation below is an extrapolation.\n";
  }
  if (cond.product_class == diffusion::ProductClass::kDefective) {
    spdlog::warn("diffusion tool asked for parameters conditioned on a defective outcome");
    prefix += "Caution: these conditions are generated for the defective product class.\n";
  }

  const auto candidates = diffusion::generate_candidates(model->context(), cond, config.guidance,
                                                         config.candidates, config.seed);
  std::vector<diffusion::ProcessParams> params;
  params.reserve(candidates.size());
  for (const auto& c : candidates) params.push_back(c.params);
  const auto ranking = surrogate::rank_candidates(*scorer, cond, params);
  const auto& best = candidates[ranking.best];

  std::string body = prefix;
  body += "Recommended process conditions (best of " + std::to_string(candidates.size()) +
          " candidates, predicted good probability " + text::fixed(ranking.scores[ranking.best], 2) + "):\n";
  body += best.params.to_text(2);
  body += "\nEnvironment: machine " + fmt_reading(cond.machine_temperature) + " C / " +
          fmt_reading(cond.machine_humidity) + " %, factory " + fmt_reading(cond.factory_temperature) + " C / " +
          fmt_reading(cond.factory_humidity) + " %.";
  if (!best.clamped.empty()) body += "\nClamped to machine limits: " + text::join(best.clamped, ", ") + ".";
  r.text = body;
  r.artifacts = {{"params", best.params.to_json()},
                 {"best_index", ranking.best},
                 {"scores", ranking.scores},
                 {"inputs", llm::to_json(inputs)},
                 {"warnings", violations}};
  r.elapsed = since(start);
  return r;
}

Toolbox::Toolbox(ToolboxDeps deps) : deps_(std::move(deps)) {}

std::size_t Toolbox::invocations(ToolName tool) const { return counts_[static_cast<std::size_t>(tool)].load(); }

ToolResult Toolbox::invoke(std::string_view tool, const std::string& subtask, llm::UsageMeter* scoped) const {
  auto parsed = tool_from_string(tool);
  if (!parsed) throw NotFoundError("unknown tool '" + std::string(tool) + "'");
  return invoke(*parsed, subtask, scoped);
}

ToolResult Toolbox::invoke(ToolName tool, const std::string& subtask, llm::UsageMeter* scoped) const {
  if (text::trim(subtask).empty()) throw PreconditionError("tool task is empty");
  counts_[static_cast<std::size_t>(tool)].fetch_add(1);
  const auto start = Clock::now();
  ToolResult r;
  switch (tool) {
    case ToolName::kTableRetriever: r = table(subtask, scoped); break;
    case ToolName::kManualRetriever: r = manual(subtask, scoped); break;
    case ToolName::kInternetSearch: r = search(subtask, scoped); break;
    case ToolName::kLlmInfer: r = llm_infer(subtask, scoped); break;
    case ToolName::kDiffusionModel: r = diffusion(subtask, scoped); break;
  }
  r.tool = tool;
  r.elapsed = since(start);
  if (text::trim(r.text).empty()) r.text = "The tool returned no content.";
  return r;
}

ToolResult Toolbox::table(const std::string& subtask, llm::UsageMeter* scoped) const {
  if (!deps_.table) throw ToolUnavailableError("troubleshooting table is not loaded");
  auto res = deps_.table->retrieve(subtask, scoped);
  ToolResult r;
  r.text = std::move(res.text);
  r.artifacts = {{"retrieval", res.trace.to_json()}};
  r.completions = std::move(res.completions);
  return r;
}

ToolResult Toolbox::manual(const std::string& subtask, llm::UsageMeter* scoped) const {
  if (!deps_.manual) throw ToolUnavailableError("machine manual is not loaded");
  auto res = deps_.manual->retrieve(subtask, scoped);
  ToolResult r;
  r.text = std::move(res.text);
  r.artifacts = {{"retrieval", res.trace.to_json()}};
  r.completions = std::move(res.completions);
  return r;
}

ToolResult Toolbox::search(const std::string& subtask, llm::UsageMeter* scoped) const {
  if (!deps_.search) throw ToolUnavailableError("no search provider is configured");
  ToolResult r;
  std::vector<SearchHit> hits;
  try {
    hits = deps_.search->search(subtask, kMaxSearchResults);
  } catch (const Error& e) {
    spdlog::warn("web search failed: {}", e.what());
    r.degraded = true;
    r.text = std::string("Web search is currently unavailable (") + e.what() +
             "). Continue without web results.";
    return r;
  }
  if (hits.size() > kMaxSearchResults) hits.resize(kMaxSearchResults);
  nlohmann::json list = nlohmann::json::array();
  std::string context;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    list.push_back({{"title", hits[i].title}, {"url", hits[i].url}, {"snippet", hits[i].snippet}});
    context += "[" + std::to_string(i + 1) + "] " + hits[i].title + " (" + hits[i].url + ")\n" + hits[i].snippet + "\n";
  }
  r.artifacts = {{"results", list}};
  if (hits.empty()) {
    r.text = "No web results found for: " + subtask;
    return r;
  }
  if (deps_.gateway == nullptr || !deps_.prompts) {
    r.text = context;
    return r;
  }
  llm::CompletionRequest req;
  req.stage_tag = "search_summary";
  req.temperature = deps_.llm_temperature;
  req.messages.push_back(
      llm::ChatMessage::user(deps_.prompts->render("search_summary", {{"input", subtask}, {"context", context}})));
  try {
    auto c = deps_.gateway->complete(req, scoped);
    r.text = text::trim(c.text).empty() ? context : c.text;
    r.completions.push_back(std::move(c));
  } catch (const FixtureMissError&) {
    throw;
  } catch (const Error& e) {
    spdlog::warn("search summary failed ({}); returning raw results", e.what());
    r.text = context;
  }
  return r;
}

ToolResult Toolbox::llm_infer(const std::string& subtask, llm::UsageMeter* scoped) const {
  if (deps_.gateway == nullptr || !deps_.prompts) throw ToolUnavailableError("no language model is configured");
  llm::CompletionRequest req;
  req.stage_tag = "llm_infer";
  req.temperature = deps_.llm_temperature;
  req.messages.push_back(llm::ChatMessage::user(deps_.prompts->render("executor", {{"input", subtask}})));
  auto c = deps_.gateway->complete(req, scoped);
  ToolResult r;
  r.text = c.text;
  r.completions.push_back(std::move(c));
  return r;
}

ToolResult Toolbox::diffusion(const std::string& subtask, llm::UsageMeter* scoped) const {
  if (deps_.gateway == nullptr || !deps_.prompts) throw ToolUnavailableError("no language model is configured");
  const auto start = Clock::now();
  auto formatted = format_diffusion_input(*deps_.gateway, *deps_.prompts, subtask, scoped);
  SubStage fmt{"diffusion_formatter", llm::to_json(formatted.inputs).dump(), since(start)};
  const auto sample_start = Clock::now();
  ToolResult r = run_diffusion_tool(formatted.inputs, deps_.diffusion.get(), deps_.surrogate.get(),
                                    deps_.diffusion_config);
  r.substages.push_back(std::move(fmt));
  r.substages.push_back({"diffusion_model", r.text, since(sample_start)});
  r.completions = std::move(formatted.completions);
  if (formatted.fallback) r.artifacts["formatter_fallback"] = true;
  if (!formatted.dropped.empty()) r.artifacts["dropped"] = formatted.dropped;
  return r;
}

}  // namespace moldchat::toolbox
