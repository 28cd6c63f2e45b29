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

#ifndef CISIMKIT_FCN_MODEL_H_
#define CISIMKIT_FCN_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cisimkit/config.h"

namespace cisimkit::fcn {

// Codes are part of the model file format.
enum class Activation : std::uint32_t { kLinear = 0, kLeakyRelu = 1, kTanh = 2 };

inline constexpr double kLeakySlope = 0.01;

std::string ActivationName(Activation a);
Activation ParseActivation(const std::string& name);

struct LayerSpec {
  int filters = 8;
  int filter_len = 55;
  Activation activation = Activation::kLeakyRelu;
};

// Depth/width of the enhancer. The last layer always has one filter.
struct Architecture {
  std::vector<LayerSpec> layers;

  // `hidden` leaky-rectifier layers of `filters` x `filter_len`, then a
  // single linear output filter of the same length.
  static Architecture Uniform(int hidden, int filters, int filter_len);
  // 4 layers (3 hidden x 8 filters, output 1 filter), filter length 55.
  static Architecture Default() { return Uniform(3, 8, 55); }

  void Validate() const;
  // Keys fcn.layers (hidden count), fcn.filters, fcn.filter_len.
  static Architecture FromConfig(const KeyValueConfig& kv);
};

// Waveform-in, waveform-out fully convolutional network with same-length
// padding at every layer. Parameters live in one flat vector, layer by
// layer: weights [filters][in_channels][filter_len], then biases.
class FcnModel {
 public:
  FcnModel() = default;
  explicit FcnModel(Architecture arch);  // all parameters zero

  // Glorot-uniform weights (+/- sqrt(6 / (fan_in + fan_out))), zero biases,
  // rounded to float32 so the model file stores them exactly.
  static FcnModel Initialize(const Architecture& arch, std::uint64_t seed);
  // One layer holding one centred unit tap: output equals input.
  static FcnModel Identity(int filter_len = 1);

  const Architecture& architecture() const { return arch_; }
  int num_layers() const { return static_cast<int>(arch_.layers.size()); }
  int in_channels(int layer) const { return layer == 0 ? 1 : arch_.layers[layer - 1].filters; }
  std::size_t weight_offset(int layer) const { return offsets_[layer]; }
  std::size_t bias_offset(int layer) const;
  std::size_t num_params() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  double* weights(int layer) { return params_.data() + offsets_[layer]; }
  const double* weights(int layer) const { return params_.data() + offsets_[layer]; }
  double* biases(int layer) { return params_.data() + bias_offset(layer); }
  const double* biases(int layer) const { return params_.data() + bias_offset(layer); }

  // Rounds every parameter to the nearest float32.
  void RoundToStorage();
  bool AllFinite() const;

  // Output has the input's length.
  std::vector<double> Forward(std::span<const double> x) const;

 private:
  Architecture arch_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
};

// Binary format: "FCNSE1", u32 layer count, per layer u32 (filters,
// filter_len, activation code), then per layer the float32 weights followed
// by that layer's float32 biases. All integers little-endian.
void SaveModel(const FcnModel& model, const std::filesystem::path& path);
FcnModel LoadModel(const std::filesystem::path& path);

}  // namespace cisimkit::fcn

#endif  // CISIMKIT_FCN_MODEL_H_
