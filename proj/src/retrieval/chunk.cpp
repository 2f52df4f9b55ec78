// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/retrieval/chunk.hpp"

#include "moldchat/common/error.hpp"

namespace moldchat::retrieval {

std::string_view to_string(ChunkSource source) {
  switch (source) {
    case ChunkSource::kTableDirection:
      return "table_direction";
    case ChunkSource::kTablePriority:
      return "table_priority";
    case ChunkSource::kManualPage:
      return "manual_page";
    case ChunkSource::kWeb:
      return "web";
  }
  return "web";
}

ChunkSource chunk_source_from_string(std::string_view name) {
  for (auto s : {ChunkSource::kTableDirection, ChunkSource::kTablePriority, ChunkSource::kManualPage,
                 ChunkSource::kWeb}) {
    if (name == to_string(s)) return s;
  }
  throw ValidationError("unknown chunk source '" + std::string(name) + "'");
}

std::optional<int> Chunk::page() const {
  auto it = meta.find("page");
  if (it == meta.end()) return std::nullopt;
  return std::stoi(it->second);
}

nlohmann::json to_json(const Chunk& c) {
  return {{"id", c.id}, {"text", c.text}, {"source", std::string(to_string(c.source))}, {"meta", c.meta}};
}

Chunk chunk_from_json(const nlohmann::json& j) {
  Chunk c;
  c.id = j.at("id").get<std::int64_t>();
  c.text = j.at("text").get<std::string>();
  c.source = chunk_source_from_string(j.at("source").get<std::string>());
  c.meta = j.value("meta", std::map<std::string, std::string>{});
  return c;
}

}  // namespace moldchat::retrieval
