// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace moldchat::retrieval {

enum class ChunkSource { kTableDirection, kTablePriority, kManualPage, kWeb };

std::string_view to_string(ChunkSource source);
ChunkSource chunk_source_from_string(std::string_view name);

struct Chunk {
  std::int64_t id = 0;
  std::string text;
  ChunkSource source = ChunkSource::kManualPage;
  /// "defect" for table chunks, "page" for manual pages, "url" for web.
  std::map<std::string, std::string> meta;

  std::optional<int> page() const;
  bool operator==(const Chunk&) const = default;
};

nlohmann::json to_json(const Chunk& chunk);
Chunk chunk_from_json(const nlohmann::json& j);

}  // namespace moldchat::retrieval
