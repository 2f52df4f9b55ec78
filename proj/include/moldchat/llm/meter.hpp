// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mutex>
#include <vector>

#include "moldchat/llm/types.hpp"

namespace moldchat::llm {

struct MeterTotals {
  TokenUsage usage;
  double cost = 0.0;
  Seconds latency{0.0};
  std::size_t calls = 0;
};

/// Thread-safe record of model calls. Totals are always the sum of records.
class UsageMeter {
 public:
  void record(const Completion& completion);

  MeterTotals totals() const;
  std::vector<Completion> records() const;
  void reset();

 private:
  mutable std::mutex mu_;
  std::vector<Completion> records_;
};

}  // namespace moldchat::llm
