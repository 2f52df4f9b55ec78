// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace moldchat::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool contains_icase(std::string_view haystack, std::string_view needle);
bool starts_with_icase(std::string_view s, std::string_view prefix);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string replace_all(std::string s, std::string_view from, std::string_view to);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view s);
/// Short hex digest used to fingerprint prompts in traces.
std::string digest_hex(std::string_view s);

/// Every decimal number literal in `s`, in order of appearance.
std::vector<double> extract_numbers(std::string_view s);

/// Formats a double with a fixed number of decimals.
std::string fixed(double value, int decimals);

/// First balanced `{...}` block in `s` that parses as JSON (object), if any.
/// Python-style dict literals (single quotes, None/True/False) are accepted.
std::optional<nlohmann::json> find_json_object(std::string_view s);

/// Rewrites a Python dict/list literal into JSON text. Leaves valid JSON as is.
std::string python_literal_to_json(std::string_view s);

}  // namespace moldchat::text
