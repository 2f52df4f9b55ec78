// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>

#include "moldchat/llm/backend.hpp"
#include "moldchat/llm/gateway.hpp"
#include "moldchat/orchestrator/pipeline.hpp"
#include "moldchat/service/config.hpp"

namespace moldchat::service {

/// Fully wired chat stack built from a ServiceConfig.
struct Engine {
  ServiceConfig config;
  std::shared_ptr<llm::Backend> backend;
  std::unique_ptr<llm::Gateway> gateway;
  std::shared_ptr<const llm::PromptLibrary> prompts;
  std::shared_ptr<const toolbox::Toolbox> tools;
  std::unique_ptr<orchestrator::Pipeline> pipeline;
  /// Tool name to availability; unavailable tools fail when invoked.
  std::map<std::string, bool> tool_status;
};

/// Throws ConfigError listing every missing file at once.
std::unique_ptr<Engine> build_engine(const ServiceConfig& config);

/// Same as build_engine but with a caller-supplied backend (tests).
std::unique_ptr<Engine> build_engine(const ServiceConfig& config, std::shared_ptr<llm::Backend> backend);

}  // namespace moldchat::service
