// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "moldchat/diffusion/dataset.hpp"
#include "moldchat/diffusion/params.hpp"

namespace moldchat::surrogate {

inline constexpr std::size_t kNumFeatures = diffusion::kNumEnv + diffusion::kNumParams;
using Features = std::array<double, kNumFeatures>;

/// Environment readings in kEnvKeys order followed by the ten parameters.
Features make_features(const diffusion::EnvCondition& condition, const diffusion::ProcessParams& params);

enum class Label { kGood, kDefective };

struct LabeledRecord {
  Features features{};
  Label label = Label::kGood;
  double weight = 1.0;
};

/// Label follows the record's product class.
std::vector<LabeledRecord> to_labeled(const std::vector<diffusion::Record>& rows);

struct GBTHyper {
  int trees = 100;
  int depth = 3;
  double learning_rate = 0.1;
  double l2 = 1.0;                 // leaf L2 penalty
  double min_child_hessian = 1e-3;
  /// Reserved for row/column subsampling; fitting is fully deterministic
  /// without it.
  std::uint64_t seed = 0;
};

/// Anything that scores a feature vector by probability of a good outcome.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual double good_probability(const Features& x) const = 0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  double predict(const Features& x) const;
  int depth() const;
  bool operator==(const Tree&) const = default;
};

class GBTModel final : public Scorer {
 public:
  GBTModel() = default;
  GBTModel(std::vector<Tree> trees, double learning_rate, double base_score, int max_depth);

  /// Base score plus learning_rate times the sum of leaf values (log-odds).
  double raw_score(const Features& x) const;
  double good_probability(const Features& x) const override;
  /// Checks the feature count, then scores.
  double predict_good_probability(const std::vector<double>& features) const;

  const std::vector<Tree>& trees() const { return trees_; }
  double learning_rate() const { return learning_rate_; }
  double base_score() const { return base_score_; }
  int max_depth() const { return max_depth_; }

  nlohmann::json to_json() const;
  static GBTModel from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static GBTModel load(const std::filesystem::path& path);

  bool operator==(const GBTModel& other) const;

 private:
  std::vector<Tree> trees_;
  double learning_rate_ = 0.1;
  double base_score_ = 0.0;
  int max_depth_ = 0;
};

/// Gradient boosting on logistic loss with exact greedy splits and Newton
/// leaf values -G / (H + l2). Throws ValidationError when only one label is
/// present.
GBTModel fit(const std::vector<LabeledRecord>& records, const GBTHyper& hyper = {});

struct Ranking {
  std::size_t best = 0;
  std::vector<double> scores;
};

/// Argmax of good probability; ties go to the lowest index.
Ranking rank_candidates(const Scorer& model, const diffusion::EnvCondition& condition,
                        const std::vector<diffusion::ProcessParams>& candidates);

}  // namespace moldchat::surrogate
