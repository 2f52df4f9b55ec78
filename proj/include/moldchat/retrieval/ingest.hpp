// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "moldchat/retrieval/chunk.hpp"

namespace moldchat::retrieval {

using CsvRow = std::vector<std::string>;

/// Comma-separated values with double-quoted fields ("" escapes a quote).
/// Blank lines are skipped.
std::vector<CsvRow> parse_csv(const std::string& content);

/// One troubleshooting-table row. The first cell may list aliases after the
/// canonical defect name, separated by '|'.
struct DefectRow {
  std::string defect;
  std::vector<std::string> aliases;
  std::vector<std::string> directions;  // "+", "-" or "" per parameter
  std::vector<int> priorities;          // 0 where the direction is blank
};

struct TroubleshootingTable {
  std::vector<std::string> parameters;
  std::vector<DefectRow> rows;
};

/// Checks that both documents have identical defect rows and parameter
/// columns (IngestError naming the difference) and that every cell is valid
/// (ValidationError).
TroubleshootingTable parse_table(const std::string& direction_csv, const std::string& priority_csv);

std::string render_direction_chunk(const TroubleshootingTable& table, const DefectRow& row);
std::string render_priority_chunk(const TroubleshootingTable& table, const DefectRow& row);

/// One direction chunk and one priority chunk per defect, ids from 0 in file
/// order. meta: defect, aliases.
std::vector<Chunk> ingest_table(const std::string& direction_csv, const std::string& priority_csv);
std::vector<Chunk> ingest_table_files(const std::filesystem::path& direction_csv,
                                      const std::filesystem::path& priority_csv);

/// Newline-delimited {page, content} records. One chunk per non-empty page,
/// sorted by page; chunk id equals the page number.
std::vector<Chunk> ingest_manual(const std::string& jsonl);
std::vector<Chunk> ingest_manual_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

}  // namespace moldchat::retrieval
