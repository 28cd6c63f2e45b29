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

#ifndef CISIMKIT_DSP_BUTTERWORTH_H_
#define CISIMKIT_DSP_BUTTERWORTH_H_

#include <complex>
#include <span>
#include <vector>

#include "cisimkit/dsp/audio.h"

namespace cisimkit::dsp {

// Normalized second-order section:
//   H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2).
// First-order sections have b2 = a2 = 0.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  std::complex<double> Response(double omega) const;
};

enum class FilterKind { kLowpass, kBandpass };

struct BiquadCascade {
  std::vector<Biquad> sections;
  int order = 0;
  FilterKind kind = FilterKind::kLowpass;
  std::vector<double> cutoffs_hz;
  double fs_hz = 0.0;

  // Complex response at `freq_hz`.
  std::complex<double> Response(double freq_hz) const;
  double MagnitudeDb(double freq_hz) const;
  // Magnitudes of all section poles.
  std::vector<double> PoleMagnitudes() const;
};

// Butterworth design by bilinear transform with pre-warping at the cutoff(s).
// `order` is the prototype order (1..6); a bandpass of order N has 2N poles.
// Lowpass takes one cutoff, bandpass two ascending edges, all inside
// (0, fs/2). Gain is unity at DC (lowpass) or at the band centre (bandpass).
BiquadCascade DesignButterworth(int order, FilterKind kind, std::span<const double> cutoffs_hz,
                                double fs_hz);

// Direct-form II transposed, zero initial state. The signal rate must
// match the design rate.
AudioBuffer ApplyFilter(const AudioBuffer& x, const BiquadCascade& filter);

// In-place variant over raw samples; the caller vouches for the rate.
void FilterInPlace(std::span<double> x, const BiquadCascade& filter);

}  // namespace cisimkit::dsp

#endif  // CISIMKIT_DSP_BUTTERWORTH_H_
