// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/retrieval/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "moldchat/common/error.hpp"
#include "moldchat/common/text.hpp"

namespace moldchat::retrieval {

std::vector<CsvRow> parse_csv(const std::string& content) {
  std::vector<CsvRow> rows;
  CsvRow row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  auto end_field = [&] {
    row.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    bool blank = true;
    for (const auto& f : row) blank = blank && text::trim(f).empty();
    if (!blank) rows.push_back(row);
    row.clear();
  };
  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_row();
    } else if (c != '\r') {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw ValidationError("CSV ends inside a quoted field");
  if (!field.empty() || !row.empty()) end_row();
  return rows;
}

namespace {

struct RawTable {
  std::vector<std::string> parameters;
  std::vector<std::string> defect_cells;
  std::vector<std::vector<std::string>> cells;
};

RawTable split_table(const std::string& content, const std::string& which) {
  auto rows = parse_csv(content);
  if (rows.size() < 2) throw ValidationError(which + " table needs a header and at least one defect row");
  RawTable t;
  for (std::size_t j = 1; j < rows[0].size(); ++j) t.parameters.push_back(text::trim(rows[0][j]));
  if (t.parameters.empty()) throw ValidationError(which + " table has no parameter columns");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    auto r = rows[i];
    if (r.size() > t.parameters.size() + 1) {
      throw ValidationError(which + " table row " + std::to_string(i + 1) + " has more cells than the header");
    }
    r.resize(t.parameters.size() + 1);
    t.defect_cells.push_back(text::trim(r[0]));
    std::vector<std::string> cells;
    for (std::size_t j = 1; j < r.size(); ++j) cells.push_back(text::trim(r[j]));
    t.cells.push_back(std::move(cells));
  }
  return t;
}

std::string canonical(const std::string& defect_cell) { return text::trim(text::split(defect_cell, '|').front()); }

template <typename Seq>
std::string diff_names(const Seq& a, const Seq& b) {
  std::vector<std::string> only_a;
  std::vector<std::string> only_b;
  std::set<std::string> sa(a.begin(), a.end());
  std::set<std::string> sb(b.begin(), b.end());
  for (const auto& x : sa) {
    if (!sb.count(x)) only_a.push_back(x);
  }
  for (const auto& x : sb) {
    if (!sa.count(x)) only_b.push_back(x);
  }
  return "only in directions: [" + text::join(only_a, ", ") + "], only in priorities: [" + text::join(only_b, ", ") +
         "]";
}

}  // namespace

TroubleshootingTable parse_table(const std::string& direction_csv, const std::string& priority_csv) {
  const RawTable dir = split_table(direction_csv, "direction");
  const RawTable pri = split_table(priority_csv, "priority");

  if (dir.parameters != pri.parameters) {
    throw IngestError("parameter columns differ: " + diff_names(dir.parameters, pri.parameters));
  }
  std::vector<std::string> dir_defects;
  std::vector<std::string> pri_defects;
  for (const auto& d : dir.defect_cells) dir_defects.push_back(canonical(d));
  for (const auto& d : pri.defect_cells) pri_defects.push_back(canonical(d));
  if (std::set<std::string>(dir_defects.begin(), dir_defects.end()).size() != dir_defects.size()) {
    throw IngestError("direction table lists a defect twice");
  }
  if (dir_defects != pri_defects) {
    throw IngestError("defect rows differ: " + diff_names(dir_defects, pri_defects));
  }

  TroubleshootingTable table;
  table.parameters = dir.parameters;
  for (std::size_t i = 0; i < dir_defects.size(); ++i) {
    DefectRow row;
    auto names = text::split(dir.defect_cells[i], '|');
    row.defect = dir_defects[i];
    if (row.defect.empty()) throw ValidationError("defect name missing in row " + std::to_string(i + 2));
    for (std::size_t k = 1; k < names.size(); ++k) {
      if (auto a = text::trim(names[k]); !a.empty()) row.aliases.push_back(a);
    }
    for (std::size_t j = 0; j < table.parameters.size(); ++j) {
      const std::string& d = dir.cells[i][j];
      const std::string& p = pri.cells[i][j];
      const std::string where = "'" + row.defect + "' / '" + table.parameters[j] + "'";
      if (d != "+" && d != "-" && !d.empty()) {
        throw ValidationError("direction cell " + where + " is '" + d + "', expected +, - or blank");
      }
      int prio = 0;
      if (!p.empty()) {
        std::size_t used = 0;
        try {
          prio = std::stoi(p, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != p.size() || prio <= 0) {
          throw ValidationError("priority cell " + where + " is '" + p + "', expected a positive integer");
        }
      }
      if (d.empty() != p.empty()) {
        throw IngestError("cell " + where + " has a direction without a priority or the reverse");
      }
      row.directions.push_back(d);
      row.priorities.push_back(prio);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

std::string defect_header(const DefectRow& row) {
  std::string h = "Defect: " + row.defect;
  if (!row.aliases.empty()) h += " (also called " + text::join(row.aliases, ", ") + ")";
  return h;
}

}  // namespace

std::string render_direction_chunk(const TroubleshootingTable& table, const DefectRow& row) {
  std::string out = defect_header(row) + "\nAdjustment directions (+ increase, - decrease):";
  for (std::size_t j = 0; j < table.parameters.size(); ++j) {
    if (row.directions[j].empty()) continue;
    out += "\n" + table.parameters[j] + ": " + row.directions[j];
  }
  return out;
}

std::string render_priority_chunk(const TroubleshootingTable& table, const DefectRow& row) {
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < table.parameters.size(); ++j) {
    if (row.priorities[j] > 0) cols.push_back(j);
  }
  std::stable_sort(cols.begin(), cols.end(),
                   [&](std::size_t a, std::size_t b) { return row.priorities[a] < row.priorities[b]; });
  std::string out = defect_header(row) + "\nAdjustment priorities (1 = adjust first):";
  for (std::size_t j : cols) out += "\n" + table.parameters[j] + ": " + std::to_string(row.priorities[j]);
  return out;
}

std::vector<Chunk> ingest_table(const std::string& direction_csv, const std::string& priority_csv) {
  const auto table = parse_table(direction_csv, priority_csv);
  std::vector<Chunk> chunks;
  std::int64_t id = 0;
  for (const auto& row : table.rows) {
    std::map<std::string, std::string> meta{{"defect", row.defect}};
    if (!row.aliases.empty()) meta["aliases"] = text::join(row.aliases, "|");
    chunks.push_back(Chunk{id++, render_direction_chunk(table, row), ChunkSource::kTableDirection, meta});
    chunks.push_back(Chunk{id++, render_priority_chunk(table, row), ChunkSource::kTablePriority, meta});
  }
  return chunks;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Chunk> ingest_table_files(const std::filesystem::path& direction_csv,
                                      const std::filesystem::path& priority_csv) {
  return ingest_table(read_file(direction_csv), read_file(priority_csv));
}

std::vector<Chunk> ingest_manual(const std::string& jsonl) {
  std::vector<Chunk> chunks;
  std::set<int> seen;
  std::size_t line_no = 0;
  for (const auto& line : text::split_lines(jsonl)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("manual line " + std::to_string(line_no) + " is not JSON: " + e.what());
    }
    if (!rec.contains("page") || !rec["page"].is_number_integer()) {
      throw ValidationError("manual line " + std::to_string(line_no) + " lacks an integer page");
    }
    const int page = rec["page"].get<int>();
    if (page < 1) throw ValidationError("manual page number " + std::to_string(page) + " is not positive");
    if (!seen.insert(page).second) throw ValidationError("manual page " + std::to_string(page) + " appears twice");
    const std::string content = rec.value("content", std::string{});
    if (text::trim(content).empty()) {
      spdlog::warn("manual page {} has no content; skipped", page);
      continue;
    }
    chunks.push_back(Chunk{page, content, ChunkSource::kManualPage, {{"page", std::to_string(page)}}});
  }
  std::sort(chunks.begin(), chunks.end(), [](const Chunk& a, const Chunk& b) { return a.id < b.id; });
  return chunks;
}

std::vector<Chunk> ingest_manual_file(const std::filesystem::path& path) { return ingest_manual(read_file(path)); }

}  // namespace moldchat::retrieval
