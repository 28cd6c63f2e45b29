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

#ifndef CISIMKIT_DSP_AUDIO_H_
#define CISIMKIT_DSP_AUDIO_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cisimkit::dsp {

// Default processing rate. Every signal entering the pipeline is resampled
// to this rate unless configured otherwise.
inline constexpr int kProcessingRate = 16000;

// Mono signal with its sample rate. Samples are nominally in [-1, 1].
struct AudioBuffer {
  std::vector<double> samples;
  int sample_rate = kProcessingRate;

  AudioBuffer() = default;
  AudioBuffer(std::vector<double> s, int fs) : samples(std::move(s)), sample_rate(fs) {}

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate; }
  std::span<const double> view() const { return samples; }
};

// Throws Error if the sample rate is not positive or any sample is NaN/Inf.
void Validate(const AudioBuffer& x, const std::string& what = "signal");

// y[n] = x[n] - a * x[n-1] with x[-1] = 0. Requires a in [0, 1].
AudioBuffer PreEmphasis(const AudioBuffer& x, double a);

AudioBuffer FullWaveRectify(const AudioBuffer& x);

// Root mean square. Throws Error on empty input.
double Rms(std::span<const double> x);
inline double Rms(const AudioBuffer& x) { return Rms(x.view()); }

}  // namespace cisimkit::dsp

#endif  // CISIMKIT_DSP_AUDIO_H_
