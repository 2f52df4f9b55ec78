// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/diffusion/denoiser.hpp"

#include <cmath>
#include <cstring>
#include <random>

#include "moldchat/common/error.hpp"

namespace moldchat::diffusion {

nlohmann::json Topology::to_json() const {
  return {{"x_dim", x_dim},   {"env_dim", env_dim}, {"classes", classes},
          {"hidden", hidden}, {"layers", layers},   {"time_dim", time_dim}};
}

Topology Topology::from_json(const nlohmann::json& j) {
  Topology t;
  t.x_dim = j.at("x_dim").get<int>();
  t.env_dim = j.at("env_dim").get<int>();
  t.classes = j.at("classes").get<int>();
  t.hidden = j.at("hidden").get<int>();
  t.layers = j.at("layers").get<int>();
  t.time_dim = j.at("time_dim").get<int>();
  return t;
}

namespace {

Eigen::MatrixXd silu(const Eigen::MatrixXd& z) { return z.array() / (1.0 + (-z.array()).exp()); }

Eigen::MatrixXd silu_grad(const Eigen::MatrixXd& z) {
  const Eigen::ArrayXXd s = 1.0 / (1.0 + (-z.array()).exp());
  return (s * (1.0 + z.array() * (1.0 - s))).matrix();
}

}  // namespace

std::vector<DenoiserNet::Tensor> DenoiserNet::blank_tensors(const Topology& t) {
  std::vector<Tensor> v;
  const int h = t.hidden;
  v.push_back({"w_in", Eigen::MatrixXd::Zero(h, t.x_dim)});
  v.push_back({"b_in", Eigen::MatrixXd::Zero(h, 1)});
  v.push_back({"w_time", Eigen::MatrixXd::Zero(h, t.time_dim)});
  v.push_back({"b_time", Eigen::MatrixXd::Zero(h, 1)});
  v.push_back({"class_emb", Eigen::MatrixXd::Zero(h, t.classes)});
  v.push_back({"w_env", Eigen::MatrixXd::Zero(h, t.env_dim)});
  v.push_back({"b_env", Eigen::MatrixXd::Zero(h, 1)});
  v.push_back({"null_token", Eigen::MatrixXd::Zero(h, 1)});
  v.push_back({"w_out", Eigen::MatrixXd::Zero(t.x_dim, h)});
  v.push_back({"b_out", Eigen::MatrixXd::Zero(t.x_dim, 1)});
  for (int k = 0; k < t.layers; ++k) {
    v.push_back({"w_hidden_" + std::to_string(k), Eigen::MatrixXd::Zero(h, h)});
    v.push_back({"b_hidden_" + std::to_string(k), Eigen::MatrixXd::Zero(h, 1)});
  }
  return v;
}

DenoiserNet::DenoiserNet(Topology topo, std::uint64_t seed) : topo_(topo) {
  if (topo.x_dim < 1 || topo.hidden < 1 || topo.layers < 0 || topo.time_dim < 2 || topo.time_dim % 2 != 0 ||
      topo.classes < 1 || topo.env_dim < 1) {
    throw PreconditionError("invalid denoiser topology");
  }
  if (topo.env_dim != 4) throw PreconditionError("denoiser expects four environment inputs");
  tensors_ = blank_tensors(topo);
  std::mt19937_64 rng(seed);
  auto uniform_fill = [&](Eigen::MatrixXd& m, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = u(rng);
    }
  };
  for (auto& tensor : tensors_) {
    if (tensor.name.rfind("b_", 0) == 0) continue;
    const double fan_in = static_cast<double>(tensor.value.cols());
    double scale = std::sqrt(3.0 / fan_in);
    if (tensor.name == "class_emb" || tensor.name == "null_token") scale = 0.5;
    if (tensor.name == "w_out") scale *= 0.1;
    uniform_fill(tensor.value, scale);
  }
}

const Eigen::MatrixXd& DenoiserNet::tensor(const std::string& name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t.value;
  }
  throw NotFoundError("denoiser has no tensor '" + name + "'");
}

std::size_t DenoiserNet::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += static_cast<std::size_t>(t.value.size());
  return n;
}

Eigen::MatrixXd DenoiserNet::time_features(const std::vector<int>& t) const {
  const int half = topo_.time_dim / 2;
  Eigen::MatrixXd f(topo_.time_dim, static_cast<Eigen::Index>(t.size()));
  for (std::size_t c = 0; c < t.size(); ++c) {
    for (int i = 0; i < half; ++i) {
      const double freq = std::exp(-std::log(10000.0) * i / half);
      const double arg = static_cast<double>(t[c]) * freq;
      f(i, static_cast<Eigen::Index>(c)) = std::sin(arg);
      f(half + i, static_cast<Eigen::Index>(c)) = std::cos(arg);
    }
  }
  return f;
}

Eigen::MatrixXd DenoiserNet::forward(const Eigen::MatrixXd& x, const std::vector<int>& t, const CondBatch& cond,
                                     Cache* cache) const {
  const Eigen::Index batch = x.cols();
  if (x.rows() != topo_.x_dim) throw PreconditionError("denoiser input has the wrong dimension");
  if (static_cast<Eigen::Index>(t.size()) != batch || static_cast<Eigen::Index>(cond.null.size()) != batch ||
      static_cast<Eigen::Index>(cond.product_class.size()) != batch || cond.env.cols() != batch) {
    throw PreconditionError("denoiser batch arguments differ in size");
  }

  const Eigen::MatrixXd feats = time_features(t);
  Eigen::MatrixXd e = p(kWT) * feats;
  const Eigen::MatrixXd env_proj = p(kWE) * cond.env;
  for (Eigen::Index c = 0; c < batch; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    if (cond.null[ci]) {
      e.col(c) += p(kBT).col(0) + p(kNull).col(0);
    } else {
      const int cls = cond.product_class[ci];
      if (cls < 0 || cls >= topo_.classes) throw PreconditionError("condition class out of range");
      e.col(c) += p(kBT).col(0) + p(kClassEmb).col(cls) + env_proj.col(c) + p(kBE).col(0);
    }
  }

  Eigen::MatrixXd h0 = p(kWIn) * x;
  h0.colwise() += p(kBIn).col(0);
  h0 += e;
  Eigen::MatrixXd a = silu(h0);
  std::vector<Eigen::MatrixXd> zs;
  std::vector<Eigen::MatrixXd> as;
  if (cache) {
    cache->x = x;
    cache->feats = feats;
    cache->e = e;
    cache->h0 = h0;
    cache->a0 = a;
    cache->cond = cond;
  }
  for (int k = 0; k < topo_.layers; ++k) {
    Eigen::MatrixXd z = p(kHidden + 2 * k) * a;
    z.colwise() += p(kHidden + 2 * k + 1).col(0);
    z += e;
    a += silu(z);
    if (cache) {
      zs.push_back(std::move(z));
      as.push_back(a);
    }
  }
  Eigen::MatrixXd out = p(kWOut) * a;
  out.colwise() += p(kBOut).col(0);
  if (cache) {
    cache->z = std::move(zs);
    cache->a = std::move(as);
  }
  return out;
}

std::vector<Eigen::MatrixXd> DenoiserNet::backward(const Cache& cache, const Eigen::MatrixXd& d_out) const {
  std::vector<Eigen::MatrixXd> g;
  g.reserve(tensors_.size());
  for (const auto& t : tensors_) g.push_back(Eigen::MatrixXd::Zero(t.value.rows(), t.value.cols()));

  const Eigen::MatrixXd& a_last = topo_.layers > 0 ? cache.a.back() : cache.a0;
  g[kWOut] = d_out * a_last.transpose();
  g[kBOut] = d_out.rowwise().sum();
  Eigen::MatrixXd da = p(kWOut).transpose() * d_out;
  Eigen::MatrixXd de = Eigen::MatrixXd::Zero(cache.e.rows(), cache.e.cols());

  for (int k = topo_.layers - 1; k >= 0; --k) {
    const Eigen::MatrixXd& a_prev = k == 0 ? cache.a0 : cache.a[static_cast<std::size_t>(k - 1)];
    const Eigen::MatrixXd dz = (da.array() * silu_grad(cache.z[static_cast<std::size_t>(k)]).array()).matrix();
    g[kHidden + 2 * k] = dz * a_prev.transpose();
    g[kHidden + 2 * k + 1] = dz.rowwise().sum();
    de += dz;
    da += p(kHidden + 2 * k).transpose() * dz;
  }

  const Eigen::MatrixXd dh0 = (da.array() * silu_grad(cache.h0).array()).matrix();
  g[kWIn] = dh0 * cache.x.transpose();
  g[kBIn] = dh0.rowwise().sum();
  de += dh0;

  g[kWT] = de * cache.feats.transpose();
  g[kBT] = de.rowwise().sum();
  Eigen::MatrixXd env_cols = cache.cond.env;
  for (Eigen::Index c = 0; c < de.cols(); ++c) {
    const auto ci = static_cast<std::size_t>(c);
    if (cache.cond.null[ci]) {
      g[kNull].col(0) += de.col(c);
      env_cols.col(c).setZero();
    } else {
      g[kClassEmb].col(cache.cond.product_class[ci]) += de.col(c);
      g[kBE].col(0) += de.col(c);
    }
  }
  g[kWE] = de * env_cols.transpose();
  return g;
}

Eigen::VectorXd DenoiserNet::predict(const Eigen::VectorXd& x_t, int t, const std::optional<Conditioning>& cond) const {
  CondBatch b;
  b.product_class = {cond ? cond->product_class : 0};
  b.env = cond ? Eigen::MatrixXd(cond->env) : Eigen::MatrixXd::Zero(topo_.env_dim, 1);
  b.null = {!cond.has_value()};
  return forward(x_t, {t}, b).col(0);
}

bool DenoiserNet::all_finite() const {
  for (const auto& t : tensors_) {
    if (!t.value.allFinite()) return false;
  }
  return true;
}

bool DenoiserNet::operator==(const DenoiserNet& other) const {
  if (!(topo_ == other.topo_) || tensors_.size() != other.tensors_.size()) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    const auto& a = tensors_[i];
    const auto& b = other.tensors_[i];
    if (a.name != b.name || a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols()) return false;
    if (a.value.size() && std::memcmp(a.value.data(), b.value.data(), sizeof(double) * a.value.size()) != 0) return false;
  }
  return true;
}

DenoiserNet DenoiserNet::from_tensors(Topology topo, std::vector<Tensor> tensors) {
  DenoiserNet net;
  net.topo_ = topo;
  net.tensors_ = blank_tensors(topo);
  if (tensors.size() != net.tensors_.size()) throw ValidationError("checkpoint tensor count does not match topology");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    auto& want = net.tensors_[i];
    if (tensors[i].name != want.name || tensors[i].value.rows() != want.value.rows() ||
        tensors[i].value.cols() != want.value.cols()) {
      throw ValidationError("checkpoint tensor '" + tensors[i].name + "' does not match topology");
    }
    want.value = std::move(tensors[i].value);
  }
  if (!net.all_finite()) throw ValidationError("checkpoint contains non-finite weights");
  return net;
}

}  // namespace moldchat::diffusion
