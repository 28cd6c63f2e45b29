// Copyright 2026 The cisimkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cisimkit/fcn/model.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <random>

#include "cisimkit/csv.h"
#include "cisimkit/error.h"
#include "cisimkit/fcn/conv.h"

namespace cisimkit::fcn {
namespace {

constexpr char kMagic[] = "FCNSE";
constexpr char kVersion = '1';

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xFF);
}

void PutF32(std::string& out, double v) { PutU32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

class Reader {
 public:
  explicit Reader(std::string data) : data_(std::move(data)) {}
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  double F32() { return static_cast<double>(std::bit_cast<float>(U32())); }
  std::string Bytes(std::size_t n) {
    Need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool AtEnd() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void Need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw Error("corrupt model file: truncated");
  }
  std::string data_;
  std::size_t pos_ = 0;
};

double Activate(Activation a, double z) {
  switch (a) {
    case Activation::kLinear: return z;
    case Activation::kLeakyRelu: return z > 0.0 ? z : kLeakySlope * z;
    case Activation::kTanh: return std::tanh(z);
  }
  return z;
}

}  // namespace

std::string ActivationName(Activation a) {
  switch (a) {
    case Activation::kLinear: return "linear";
    case Activation::kLeakyRelu: return "leaky_relu";
    case Activation::kTanh: return "tanh";
  }
  return "unknown";
}

Activation ParseActivation(const std::string& name) {
  for (Activation a : {Activation::kLinear, Activation::kLeakyRelu, Activation::kTanh}) {
    if (ActivationName(a) == name) return a;
  }
  throw Error("unknown activation '" + name + "' (expected linear, leaky_relu or tanh)");
}

Architecture Architecture::Uniform(int hidden, int filters, int filter_len) {
  Architecture a;
  for (int i = 0; i < hidden; ++i) a.layers.push_back({filters, filter_len, Activation::kLeakyRelu});
  a.layers.push_back({1, filter_len, Activation::kLinear});
  a.Validate();
  return a;
}

void Architecture::Validate() const {
  Require(!layers.empty(), "FCN needs at least one layer");
  for (const LayerSpec& l : layers) {
    Require(l.filters >= 1 && l.filter_len >= 1, "FCN layers need positive filter counts and lengths");
  }
  Require(layers.back().filters == 1, "the last FCN layer must have exactly one filter");
}

Architecture Architecture::FromConfig(const KeyValueConfig& kv) {
  const Architecture d = Default();
  const int hidden = kv.GetInt("fcn.layers").value_or(static_cast<int>(d.layers.size()) - 1);
  const int filters = kv.GetInt("fcn.filters").value_or(d.layers.front().filters);
  const int len = kv.GetInt("fcn.filter_len").value_or(d.layers.front().filter_len);
  Require(hidden >= 0, "fcn.layers must be non-negative");
  return Uniform(hidden, filters, len);
}

FcnModel::FcnModel(Architecture arch) : arch_(std::move(arch)) {
  arch_.Validate();
  std::size_t total = 0;
  for (int i = 0; i < num_layers(); ++i) {
    offsets_.push_back(total);
    const LayerSpec& l = arch_.layers[i];
    total += static_cast<std::size_t>(l.filters) * in_channels(i) * l.filter_len + l.filters;
  }
  params_.assign(total, 0.0);
}

std::size_t FcnModel::bias_offset(int layer) const {
  const LayerSpec& l = arch_.layers[layer];
  return offsets_[layer] + static_cast<std::size_t>(l.filters) * in_channels(layer) * l.filter_len;
}

FcnModel FcnModel::Initialize(const Architecture& arch, std::uint64_t seed) {
  FcnModel m(arch);
  std::mt19937_64 rng(seed);
  for (int i = 0; i < m.num_layers(); ++i) {
    const LayerSpec& l = arch.layers[i];
    const double fan_in = static_cast<double>(m.in_channels(i)) * l.filter_len;
    const double fan_out = static_cast<double>(l.filters) * l.filter_len;
    std::uniform_real_distribution<double> u(-std::sqrt(6.0 / (fan_in + fan_out)), std::sqrt(6.0 / (fan_in + fan_out)));
    double* w = m.weights(i);
    for (std::size_t k = 0; k < m.bias_offset(i) - m.weight_offset(i); ++k) w[k] = u(rng);
  }
  m.RoundToStorage();
  return m;
}

FcnModel FcnModel::Identity(int filter_len) {
  Architecture a;
  a.layers.push_back({1, filter_len, Activation::kLinear});
  FcnModel m(a);
  m.weights(0)[(filter_len - 1) / 2] = 1.0;
  return m;
}

void FcnModel::RoundToStorage() {
  for (double& p : params_) p = static_cast<double>(static_cast<float>(p));
}

bool FcnModel::AllFinite() const {
  for (double p : params_) {
    if (!std::isfinite(p)) return false;
  }
  return true;
}

std::vector<double> FcnModel::Forward(std::span<const double> x) const {
  Require(!x.empty(), "FCN input is empty");
  std::vector<double> cur(x.begin(), x.end());
  for (int i = 0; i < num_layers(); ++i) {
    const LayerSpec& l = arch_.layers[i];
    const ConvShape shape{in_channels(i), l.filters, l.filter_len, x.size(), ConvMode::kSame};
    std::vector<double> next(static_cast<std::size_t>(l.filters) * x.size());
    ConvForward(shape, cur.data(), weights(i), biases(i), next.data());
    if (l.activation != Activation::kLinear) {
      for (double& v : next) v = Activate(l.activation, v);
    }
    cur = std::move(next);
  }
  return cur;
}

void SaveModel(const FcnModel& model, const std::filesystem::path& path) {
  std::string out(kMagic);
  out += kVersion;
  PutU32(out, static_cast<std::uint32_t>(model.num_layers()));
  for (const LayerSpec& l : model.architecture().layers) {
    PutU32(out, static_cast<std::uint32_t>(l.filters));
    PutU32(out, static_cast<std::uint32_t>(l.filter_len));
    PutU32(out, static_cast<std::uint32_t>(l.activation));
  }
  for (double p : model.params()) PutF32(out, p);
  WriteTextFile(path, out);
}

FcnModel LoadModel(const std::filesystem::path& path) {
  Reader r(ReadTextFile(path));
  const std::string magic = r.Bytes(std::strlen(kMagic));
  if (magic != kMagic) throw Error("corrupt model file: bad magic in " + path.string());
  const std::string version = r.Bytes(1);
  if (version[0] != kVersion) {
    throw Error("unsupported version: model file " + path.string() + " has format version '" + version + "'");
  }
  const std::uint32_t n = r.U32();
  if (n == 0 || n > 1024) throw Error("corrupt model file: implausible layer count");
  Architecture arch;
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::uint32_t filters = r.U32(), len = r.U32(), act = r.U32();
    if (filters == 0 || filters > 65536 || len == 0 || len > 65536 || act > 2) {
      throw Error("corrupt model file: bad layer header");
    }
    arch.layers.push_back({static_cast<int>(filters), static_cast<int>(len), static_cast<Activation>(act)});
  }
  if (arch.layers.back().filters != 1) throw Error("corrupt model file: last layer must have one filter");
  FcnModel m(arch);
  if (r.remaining() != 4 * m.num_params()) throw Error("corrupt model file: wrong parameter count");
  for (double& p : m.params()) p = r.F32();
  return m;
}

}  // namespace cisimkit::fcn
