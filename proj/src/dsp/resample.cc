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

#include "cisimkit/dsp/resample.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "cisimkit/error.h"

namespace cisimkit::dsp {
namespace {

constexpr double kScipyBeta = 5.0;
constexpr int kScipyHalfLengthPerRate = 10;
constexpr double kOctaveRejectionDb = 60.0;

double Sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

Resampler::Resampler(int fs_in, int fs_out, Design design) {
  Require(fs_in > 0 && fs_out > 0, "sample rates must be positive");
  const int g = std::gcd(fs_in, fs_out);
  up_ = fs_out / g;
  down_ = fs_in / g;
  if (up_ == 1 && down_ == 1) return;

  const int max_rate = std::max(up_, down_);
  const double cutoff = 1.0 / max_rate;  // relative to the upsampled Nyquist
  int half_len = kScipyHalfLengthPerRate * max_rate;
  double beta = kScipyBeta;
  if (design == Design::kOctave) {
    const double roll_off = 0.5 * cutoff / 10.0;
    half_len = static_cast<int>(std::ceil((kOctaveRejectionDb - 8.0) / (28.714 * roll_off)));
    beta = 0.1102 * (kOctaveRejectionDb - 8.7);
  }
  const int num_taps = 2 * half_len + 1;
  taps_.resize(num_taps);
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  double sum = 0.0;
  for (int j = 0; j < num_taps; ++j) {
    const double m = j - half_len;
    const double r = m / half_len;
    const double window = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    taps_[j] = cutoff * Sinc(cutoff * m) * window;
    sum += taps_[j];
  }
  for (double& t : taps_) t *= up_ / sum;
  delay_ = half_len;
}

std::size_t Resampler::OutputLength(std::size_t input_length) const {
  return (input_length * up_ + down_ - 1) / down_;
}

// y[m] = sum_n x[n] * h[m*down + delay - n*up], with h zero outside its support.
std::vector<double> Resampler::Apply(std::span<const double> x) const {
  if (taps_.empty()) return {x.begin(), x.end()};
  const long n_in = static_cast<long>(x.size());
  const long taps = static_cast<long>(taps_.size());
  std::vector<double> y(OutputLength(x.size()), 0.0);
  for (long m = 0; m < static_cast<long>(y.size()); ++m) {
    const long center = m * down_ + delay_;
    // Valid n: 0 <= center - n*up < taps.
    const long n_lo = std::max(0L, (center - taps + up_) / up_);
    const long n_hi = std::min(n_in - 1, center / up_);
    double acc = 0.0;
    for (long n = n_lo; n <= n_hi; ++n) {
      const long j = center - n * up_;
      if (j >= 0 && j < taps) acc += x[n] * taps_[j];
    }
    y[m] = acc;
  }
  return y;
}

std::vector<double> Resampler::ApplyTranspose(std::span<const double> grad_y,
                                              std::size_t input_length) const {
  Require(grad_y.size() == OutputLength(input_length), "resampler adjoint size mismatch");
  if (taps_.empty()) return {grad_y.begin(), grad_y.end()};
  const long n_in = static_cast<long>(input_length);
  const long taps = static_cast<long>(taps_.size());
  std::vector<double> gx(input_length, 0.0);
  for (long m = 0; m < static_cast<long>(grad_y.size()); ++m) {
    const double g = grad_y[m];
    if (g == 0.0) continue;
    const long center = m * down_ + delay_;
    const long n_lo = std::max(0L, (center - taps + up_) / up_);
    const long n_hi = std::min(n_in - 1, center / up_);
    for (long n = n_lo; n <= n_hi; ++n) {
      const long j = center - n * up_;
      if (j >= 0 && j < taps) gx[n] += g * taps_[j];
    }
  }
  return gx;
}

AudioBuffer Resample(const AudioBuffer& x, int fs_out) {
  Require(fs_out > 0, "target sample rate must be positive");
  if (fs_out == x.sample_rate) return x;
  const Resampler resampler(x.sample_rate, fs_out);
  return AudioBuffer(resampler.Apply(x.samples), fs_out);
}

}  // namespace cisimkit::dsp
