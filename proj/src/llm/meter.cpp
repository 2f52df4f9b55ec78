// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/llm/meter.hpp"

namespace moldchat::llm {

void UsageMeter::record(const Completion& completion) {
  std::lock_guard lock(mu_);
  records_.push_back(completion);
}

MeterTotals UsageMeter::totals() const {
  std::lock_guard lock(mu_);
  MeterTotals t;
  for (const auto& r : records_) {
    t.usage += r.usage;
    t.cost += r.cost;
    t.latency += r.elapsed;
    ++t.calls;
  }
  return t;
}

std::vector<Completion> UsageMeter::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

void UsageMeter::reset() {
  std::lock_guard lock(mu_);
  records_.clear();
}

}  // namespace moldchat::llm
