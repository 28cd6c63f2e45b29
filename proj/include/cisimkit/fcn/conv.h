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

#ifndef CISIMKIT_FCN_CONV_H_
#define CISIMKIT_FCN_CONV_H_

#include <cstddef>

namespace cisimkit::fcn {

// Multi-channel 1-D cross-correlation as used by convolutional layers:
//   y[f][t] = b[f] + sum_c sum_k w[f][c][k] * x[c][t + k - pad]
// with x zero outside [0, L). kValid has pad 0 and L - len + 1 outputs;
// kSame has pad (len - 1) / 2 and L outputs.
enum class ConvMode { kValid, kSame };

struct ConvShape {
  int in_channels = 1;
  int filters = 1;
  int filter_len = 1;
  std::size_t length = 0;  // input samples per channel
  ConvMode mode = ConvMode::kSame;

  // Throws Error for a filter longer than the input in valid mode.
  std::size_t OutputLength() const;
  long Offset() const;  // -pad
};

// Tensors are row-major: x[in_channels][length], w[filters][in_channels]
// [filter_len], b[filters], y[filters][OutputLength()].
//
// These run under OpenMP and use shifted-axpy loop orders; `reference`
// holds direct serial loops used to test them and as the benchmark
// baseline. Both are deterministic for a fixed thread count and agree to
// rounding.
void ConvForward(const ConvShape& s, const double* x, const double* w, const double* b, double* y);

// Given gy = dL/dy, accumulates dL/dw into gw and dL/db into gb, and writes
// dL/dx into gx when gx is non-null.
void ConvBackward(const ConvShape& s, const double* x, const double* w, const double* gy, double* gx, double* gw,
                  double* gb);

namespace reference {
void ConvForward(const ConvShape& s, const double* x, const double* w, const double* b, double* y);
void ConvBackward(const ConvShape& s, const double* x, const double* w, const double* gy, double* gx, double* gw,
                  double* gb);
}  // namespace reference

}  // namespace cisimkit::fcn

#endif  // CISIMKIT_FCN_CONV_H_
