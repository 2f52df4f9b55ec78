// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/service/engine.hpp"

#include <spdlog/spdlog.h>

#include "moldchat/common/error.hpp"
#include "moldchat/common/text.hpp"
#include "moldchat/retrieval/ingest.hpp"

namespace moldchat::service {

namespace {

std::shared_ptr<llm::Backend> make_backend(const ServiceConfig& config) {
  if (config.backend == "live") {
    auto http = llm::HttpBackendConfig::from_env();
    if (!config.model.empty()) http.default_model = config.model;
    return std::make_shared<llm::HttpChatBackend>(http);
  }
  llm::ScriptedFixture fixture;
  for (const auto& p : config.fixtures) fixture = fixture.merged_with(llm::ScriptedFixture::load(p));
  return std::make_shared<llm::ScriptedBackend>(std::move(fixture));
}

std::string default_model(const ServiceConfig& config) {
  if (!config.model.empty()) return config.model;
  if (config.backend == "live") return llm::HttpBackendConfig::from_env().default_model;
  return "scripted";
}

}  // namespace

std::unique_ptr<Engine> build_engine(const ServiceConfig& config) {
  if (auto missing = config.missing_items(); !missing.empty()) {
    throw ConfigError("missing configuration items:\n  " + text::join(missing, "\n  "));
  }
  return build_engine(config, make_backend(config));
}

std::unique_ptr<Engine> build_engine(const ServiceConfig& config, std::shared_ptr<llm::Backend> backend) {
  std::vector<std::string> missing = config.missing_items();
  // A supplied backend makes the fixture list optional.
  std::erase_if(missing, [](const std::string& m) { return text::starts_with_icase(m, "fixtures: (none"); });
  if (!missing.empty()) throw ConfigError("missing configuration items:\n  " + text::join(missing, "\n  "));

  auto engine = std::make_unique<Engine>();
  engine->config = config;
  engine->backend = std::move(backend);
  llm::PriceTable prices = config.price_table.empty() ? llm::PriceTable{} : llm::PriceTable::load(config.price_table);
  engine->gateway = std::make_unique<llm::Gateway>(engine->backend, std::move(prices), default_model(config));
  engine->prompts = std::make_shared<const llm::PromptLibrary>(
      llm::PromptLibrary::load(config.prompts_dir.empty() ? llm::PromptLibrary::default_dir() : config.prompts_dir));

  std::shared_ptr<const retrieval::Embedder> embedder = retrieval::make_embedder(config.embedder);
  toolbox::ToolboxDeps deps;
  deps.gateway = engine->gateway.get();
  deps.prompts = engine->prompts;
  deps.diffusion_config.seed = config.diffusion_seed;

  std::shared_ptr<const retrieval::VectorStore> table_store;
  if (!config.table_store.empty()) {
    table_store = std::make_shared<const retrieval::VectorStore>(retrieval::VectorStore::load(config.table_store));
  } else if (!config.direction_csv.empty() && !config.priority_csv.empty()) {
    table_store = std::make_shared<const retrieval::VectorStore>(retrieval::VectorStore::build(
        retrieval::ingest_table_files(config.direction_csv, config.priority_csv), *embedder));
  }
  if (table_store) {
    deps.table = std::make_shared<const retrieval::TableRetriever>(table_store, embedder, engine->gateway.get(),
                                                                   engine->prompts);
  }
  std::shared_ptr<const retrieval::VectorStore> manual_store;
  if (!config.manual_store.empty()) {
    manual_store = std::make_shared<const retrieval::VectorStore>(retrieval::VectorStore::load(config.manual_store));
  } else if (!config.manual_pages.empty()) {
    manual_store = std::make_shared<const retrieval::VectorStore>(
        retrieval::VectorStore::build(retrieval::ingest_manual_file(config.manual_pages), *embedder));
  }
  if (manual_store) {
    deps.manual = std::make_shared<const retrieval::ManualRetriever>(manual_store, embedder, engine->gateway.get(),
                                                                     engine->prompts);
  }

  if (config.search_provider == "tavily") {
    deps.search = std::make_shared<toolbox::TavilySearchProvider>(toolbox::TavilyConfig::from_env());
  } else if (config.search_provider == "fixture") {
    deps.search = config.search_fixture.empty()
                      ? std::make_shared<toolbox::FixtureSearchProvider>(std::vector<toolbox::FixtureSearchProvider::Entry>{})
                      : std::make_shared<toolbox::FixtureSearchProvider>(
                            toolbox::FixtureSearchProvider::load(config.search_fixture));
  }
  if (!config.checkpoint.empty()) {
    deps.diffusion = std::make_shared<const diffusion::DiffusionModel>(diffusion::load_checkpoint(config.checkpoint));
  }
  if (!config.surrogate.empty()) {
    deps.surrogate = std::make_shared<const surrogate::GBTModel>(surrogate::GBTModel::load(config.surrogate));
  }

  engine->tool_status = {{"table_retriever", deps.table != nullptr},
                         {"manual_retriever", deps.manual != nullptr},
                         {"internet_search", deps.search != nullptr},
                         {"llm_infer", true},
                         {"diffusion_model", deps.diffusion != nullptr && deps.surrogate != nullptr}};
  for (const auto& [name, ok] : engine->tool_status) {
    if (!ok) spdlog::warn("tool {} is unavailable with this configuration", name);
  }

  engine->tools = std::make_shared<const toolbox::Toolbox>(std::move(deps));
  orchestrator::PipelineConfig pc;
  pc.replan_cap = config.replan_cap;
  pc.react_cap = config.react_cap;
  pc.debug_prompts = config.debug_prompts;
  engine->pipeline = std::make_unique<orchestrator::Pipeline>(*engine->gateway, engine->prompts, engine->tools, pc);
  return engine;
}

}  // namespace moldchat::service
