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

#include "cisimkit/dsp/audio.h"

#include <cmath>

#include "cisimkit/error.h"

namespace cisimkit::dsp {

void Validate(const AudioBuffer& x, const std::string& what) {
  Require(x.sample_rate > 0, what + ": sample rate must be positive");
  for (double v : x.samples) {
    Require(std::isfinite(v), what + ": contains non-finite samples");
  }
}

AudioBuffer PreEmphasis(const AudioBuffer& x, double a) {
  Require(a >= 0.0 && a <= 1.0, "pre-emphasis coefficient must lie in [0, 1]");
  AudioBuffer y(std::vector<double>(x.size()), x.sample_rate);
  double previous = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    y.samples[n] = x.samples[n] - a * previous;
    previous = x.samples[n];
  }
  return y;
}

AudioBuffer FullWaveRectify(const AudioBuffer& x) {
  AudioBuffer y(x.samples, x.sample_rate);
  for (double& v : y.samples) v = std::abs(v);
  return y;
}

double Rms(std::span<const double> x) {
  Require(!x.empty(), "rms of an empty signal");
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

}  // namespace cisimkit::dsp
