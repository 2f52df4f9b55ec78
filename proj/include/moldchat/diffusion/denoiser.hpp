// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace moldchat::diffusion {

struct Topology {
  int x_dim = 10;
  int env_dim = 4;
  int classes = 2;
  int hidden = 128;
  int layers = 3;
  int time_dim = 32;

  nlohmann::json to_json() const;
  static Topology from_json(const nlohmann::json& j);
  bool operator==(const Topology&) const = default;
};

/// Network-side condition: class index plus min-max normalized environment.
struct Conditioning {
  int product_class = 0;
  Eigen::Vector4d env = Eigen::Vector4d::Zero();
};

/// Batch of conditions; a column with null[i] set uses the learned null
/// token in place of the whole condition embedding.
struct CondBatch {
  std::vector<int> product_class;
  Eigen::MatrixXd env;  // env_dim x B
  std::vector<bool> null;
};

/// Anything that predicts the noise in x_t. The sampler only needs this.
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  /// `cond` empty selects the unconditional branch.
  virtual Eigen::VectorXd predict(const Eigen::VectorXd& x_t, int t,
                                  const std::optional<Conditioning>& cond) const = 0;
};

/// Residual feedforward noise predictor:
///   e   = W_t * sinusoid(t) + b_t + cond_embedding
///   a_0 = silu(W_in x + b_in + e)
///   a_k = a_{k-1} + silu(W_k a_{k-1} + b_k + e),  k = 1..layers
///   out = W_out a_L + b_out
/// cond_embedding is class_emb[c] + W_e env + b_e, or the null token.
class DenoiserNet final : public NoisePredictor {
 public:
  struct Tensor {
    std::string name;
    Eigen::MatrixXd value;
  };

  /// Intermediate values kept for the backward pass.
  struct Cache {
    Eigen::MatrixXd x, feats, e, h0, a0;
    std::vector<Eigen::MatrixXd> z, a;
    CondBatch cond;
  };

  DenoiserNet() = default;
  DenoiserNet(Topology topo, std::uint64_t seed);

  const Topology& topology() const { return topo_; }
  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }
  const Eigen::MatrixXd& tensor(const std::string& name) const;
  std::size_t parameter_count() const;

  /// Batched forward; columns are samples.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, const std::vector<int>& t, const CondBatch& cond,
                          Cache* cache = nullptr) const;
  /// Gradients of sum(d_out .* out) w.r.t. every tensor, in tensors() order.
  std::vector<Eigen::MatrixXd> backward(const Cache& cache, const Eigen::MatrixXd& d_out) const;

  Eigen::VectorXd predict(const Eigen::VectorXd& x_t, int t, const std::optional<Conditioning>& cond) const override;

  Eigen::MatrixXd time_features(const std::vector<int>& t) const;

  bool all_finite() const;
  bool operator==(const DenoiserNet& other) const;

  /// Assembles a net from stored tensors, checking names and shapes.
  static DenoiserNet from_tensors(Topology topo, std::vector<Tensor> tensors);

 private:
  enum Index : std::size_t { kWIn, kBIn, kWT, kBT, kClassEmb, kWE, kBE, kNull, kWOut, kBOut, kHidden };

  const Eigen::MatrixXd& p(std::size_t i) const { return tensors_[i].value; }
  static std::vector<Tensor> blank_tensors(const Topology& topo);

  Topology topo_;
  std::vector<Tensor> tensors_;
};

}  // namespace moldchat::diffusion
