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

#ifndef CISIMKIT_METRICS_STOI_H_
#define CISIMKIT_METRICS_STOI_H_

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "cisimkit/dsp/audio.h"
#include "cisimkit/dsp/fft.h"
#include "cisimkit/dsp/resample.h"

namespace cisimkit::metrics {

// Defaults reproduce the published reference implementation (pystoi 0.4):
// 10 kHz analysis, 256-sample Hann frames at 50% overlap, 512-point FFT,
// 15 third-octave bands from 150 Hz, 30-frame segments, -15 dB clipping
// bound and a 40 dB silent-frame gate on the clean signal.
struct StoiConfig {
  int internal_fs = 10000;
  int frame_len = 256;
  int hop = 128;
  int fft_size = 512;
  int num_bands = 15;
  double min_freq_hz = 150.0;
  int segment_frames = 30;
  double beta_db = -15.0;
  double dyn_range_db = 40.0;
  bool remove_silent = true;

  void Validate() const;
};

// Third-octave band k covers FFT bins [first, second).
std::vector<std::pair<std::size_t, std::size_t>> ThirdOctaveBands(const StoiConfig& cfg);

// Reusable STOI machinery for one input rate. Holds an FFT plan, so an
// instance must stay on one thread; make one per worker.
class StoiEvaluator {
 public:
  StoiEvaluator(StoiConfig cfg, int fs);

  const StoiConfig& config() const { return cfg_; }
  int sample_rate() const { return fs_; }

  // Score of `processed` against the `clean` reference, in [-1, 1].
  double Evaluate(std::span<const double> clean, std::span<const double> processed);

  // Clean-side quantities of the training variant (no silent-frame
  // removal), computed once per utterance.
  struct Reference {
    std::size_t input_length = 0;
    std::size_t num_frames = 0;
    std::vector<double> bands;  // num_bands x num_frames, row-major
  };
  Reference Prepare(std::span<const double> clean);

  // Training-variant score; with `grad` non-null also writes
  // d score / d processed (same length as the input). Ignores
  // config().remove_silent.
  double ValueAndGradient(const Reference& ref, std::span<const double> processed, std::vector<double>* grad);

  // Which normalized processed band values hit the clipping bound, one
  // flag per (band, segment, frame-in-segment). The training score is
  // not differentiable where this pattern changes.
  std::vector<char> ClipPattern(const Reference& ref, std::span<const double> processed);

 private:
  struct Spectra {
    std::size_t num_frames = 0;
    std::vector<std::complex<double>> bins;  // num_frames x num_bins
    std::vector<double> bands;               // num_bands x num_frames
  };
  std::vector<double> ToInternalRate(std::span<const double> x) const;
  Spectra Analyze(std::span<const double> x10);
  std::size_t CountFrames(std::size_t length) const;
  double Correlate(const std::vector<double>& xb, const std::vector<double>& yb, std::size_t num_frames,
                   std::vector<double>* grad_yb, std::vector<char>* clipped = nullptr) const;

  StoiConfig cfg_;
  int fs_;
  std::vector<double> window_;
  std::vector<std::pair<std::size_t, std::size_t>> bands_;
  std::unique_ptr<dsp::Resampler> resampler_;  // null when fs == internal_fs
  dsp::Fft fft_;
};

// One-shot evaluation-mode score; both buffers must share a sample rate.
double Stoi(const dsp::AudioBuffer& clean, const dsp::AudioBuffer& processed, const StoiConfig& cfg = {});

}  // namespace cisimkit::metrics

#endif  // CISIMKIT_METRICS_STOI_H_
