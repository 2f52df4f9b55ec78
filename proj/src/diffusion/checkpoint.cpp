// Copyright 2026 The moldchat Authors
// SPDX-License-Identifier: Apache-2.0

#include "moldchat/diffusion/checkpoint.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "moldchat/common/error.hpp"

namespace moldchat::diffusion {

namespace {

constexpr char kMagic[4] = {'M', 'C', 'D', 'F'};
constexpr std::uint64_t kVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw IoError("checkpoint is truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

double get_f64(std::istream& in) {
  const std::uint64_t bits = get_u64(in);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

void put_str(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_str(std::istream& in) {
  const auto n = get_u64(in);
  if (n > (1ull << 30)) throw IoError("checkpoint string length is implausible");
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) throw IoError("checkpoint is truncated");
  return s;
}

void put_doubles(std::ostream& out, const double* data, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) put_f64(out, data[i]);
}

template <std::size_t N>
void put_array(std::ostream& out, const std::array<double, N>& a) {
  put_doubles(out, a.data(), N);
}

template <std::size_t N>
void get_array(std::istream& in, std::array<double, N>& a) {
  for (auto& v : a) v = get_f64(in);
}

}  // namespace

bool DiffusionModel::operator==(const DiffusionModel& other) const {
  return net == other.net && schedule == other.schedule && normalizer == other.normalizer && limits == other.limits;
}

void save_checkpoint(const DiffusionModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  nlohmann::json header = {
      {"topology", model.net.topology().to_json()},
      {"schedule", {{"T", model.schedule.T}, {"kind", std::string(to_string(model.schedule.kind))}}},
      {"tensors", model.net.tensors().size()}};
  out.write(kMagic, 4);
  put_u64(out, kVersion);
  put_str(out, header.dump());
  // Floating-point fields go in binary so the round trip is exact.
  put_f64(out, model.schedule.beta_min);
  put_f64(out, model.schedule.beta_max);
  for (const auto* v : {&model.schedule.beta, &model.schedule.alpha, &model.schedule.alpha_bar, &model.schedule.sigma}) {
    put_u64(out, v->size());
    put_doubles(out, v->data(), v->size());
  }
  put_array(out, model.normalizer.param_mean);
  put_array(out, model.normalizer.param_std);
  put_array(out, model.normalizer.env_min);
  put_array(out, model.normalizer.env_max);
  put_array(out, model.limits.lo);
  put_array(out, model.limits.hi);
  for (const auto& t : model.net.tensors()) {
    put_str(out, t.name);
    put_u64(out, static_cast<std::uint64_t>(t.value.rows()));
    put_u64(out, static_cast<std::uint64_t>(t.value.cols()));
    put_doubles(out, t.value.data(), static_cast<std::size_t>(t.value.size()));
  }
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

DiffusionModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw IoError(path.string() + " is not a diffusion checkpoint");
  const auto version = get_u64(in);
  if (version != kVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(get_str(in));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("checkpoint header is corrupt: ") + e.what());
  }
  DiffusionModel m;
  const Topology topo = Topology::from_json(header.at("topology"));
  m.schedule.T = header.at("schedule").at("T").get<int>();
  m.schedule.kind = schedule_kind_from_string(header.at("schedule").at("kind").get<std::string>());
  m.schedule.beta_min = get_f64(in);
  m.schedule.beta_max = get_f64(in);
  for (auto* v : {&m.schedule.beta, &m.schedule.alpha, &m.schedule.alpha_bar, &m.schedule.sigma}) {
    const auto n = get_u64(in);
    if (n != static_cast<std::uint64_t>(m.schedule.T)) throw IoError("checkpoint schedule length does not match T");
    v->resize(n);
    for (auto& d : *v) d = get_f64(in);
  }
  get_array(in, m.normalizer.param_mean);
  get_array(in, m.normalizer.param_std);
  get_array(in, m.normalizer.env_min);
  get_array(in, m.normalizer.env_max);
  get_array(in, m.limits.lo);
  get_array(in, m.limits.hi);
  const auto count = header.at("tensors").get<std::size_t>();
  std::vector<DenoiserNet::Tensor> tensors;
  for (std::size_t i = 0; i < count; ++i) {
    DenoiserNet::Tensor t;
    t.name = get_str(in);
    const auto rows = get_u64(in);
    const auto cols = get_u64(in);
    if (rows * cols > (1ull << 28)) throw IoError("checkpoint tensor '" + t.name + "' is implausibly large");
    t.value.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index k = 0; k < t.value.size(); ++k) t.value.data()[k] = get_f64(in);
    tensors.push_back(std::move(t));
  }
  m.net = DenoiserNet::from_tensors(topo, std::move(tensors));
  return m;
}

ModelSpec ModelSpec::scaled_for(int steps) {
  if (steps < 1) throw PreconditionError("schedule needs at least one step");
  ModelSpec spec;
  spec.steps = steps;
  const double scale = 1000.0 / static_cast<double>(steps);
  spec.beta_min = std::min(1e-4 * scale, 0.5);
  spec.beta_max = std::min(0.02 * scale, 0.5);
  return spec;
}

DiffusionModel fit_model(const std::vector<Record>& data, const ModelSpec& spec, TrainReport* report,
                         const EpochHook& hook) {
  DiffusionModel m;
  m.normalizer = Normalizer::fit(data);
  m.schedule = make_schedule(spec.steps, spec.kind, spec.beta_min, spec.beta_max);
  m.limits = spec.limits;
  m.net = train(data, m.normalizer, m.schedule, spec.train, report, hook);
  return m;
}

}  // namespace moldchat::diffusion
