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

#ifndef CISIMKIT_VOCODER_VOCODER_H_
#define CISIMKIT_VOCODER_VOCODER_H_

#include <vector>

#include "cisimkit/config.h"
#include "cisimkit/dsp/audio.h"
#include "cisimkit/dsp/butterworth.h"

namespace cisimkit::vocoder {

// Loudness-growth compression of channel envelopes:
//   f(x) = log(1 + rho * (clamp(x, BL, SL) - BL) / (SL - BL)) / log(1 + rho).
// With `adapt` on, the saturation level follows a peak tracker of the
// envelope (instant attack, exponential release) evaluated once per frame
// and interpolated between frames. The tracked level is confined to
// [min_saturation_level, saturation_level], so the compression ratio moves
// frame by frame but inside a preset range.
struct AceParams {
  double base_level = 0.0156;
  double saturation_level = 0.5859;
  double steepness = 416.2;
  int frame_len = 128;
  bool adapt = true;
  double min_saturation_level = 0.1;
  double release_ms = 100.0;

  void Validate() const;
};

struct VocoderConfig {
  std::vector<double> band_edges_hz{400, 887, 1750, 3282, 6000};
  std::vector<double> carrier_hz{643, 1319, 2516, 4641};
  int bandpass_order = 3;
  int env_lpf_order = 2;
  double env_lpf_cutoff_hz = 400;
  double pre_emphasis_coeff = 0.97;
  // Vocode() scales its input to this RMS before analysis so the compressor
  // sees the same operating point whatever the recording level; 0 disables.
  double calibration_rms = 0.3;
  AceParams ace;

  int num_channels() const { return static_cast<int>(carrier_hz.size()); }
  // Throws Error when an invariant fails at sampling rate `fs`.
  void Validate(int fs) const;

  // Reads "vocoder.*" and "ace.*" keys on top of the defaults.
  static VocoderConfig FromConfig(const KeyValueConfig& kv);
  KeyValueConfig ToConfig() const;
};

// Static compression map for one sample.
double AceMap(double x, double base_level, double saturation_level, double steepness);

// Designs the filter bank once for a sampling rate; all methods are const
// and safe to share between threads.
class Vocoder {
 public:
  Vocoder(VocoderConfig config, int fs);

  const VocoderConfig& config() const { return config_; }
  int sample_rate() const { return fs_; }
  const dsp::BiquadCascade& bandpass(int channel) const { return bandpass_[channel]; }

  // Pre-emphasis followed by the bandpass bank; one signal per channel.
  std::vector<dsp::AudioBuffer> AnalyzeBands(const dsp::AudioBuffer& x) const;
  // Full-wave rectification, envelope lowpass, clamp at zero.
  dsp::AudioBuffer ExtractEnvelope(const dsp::AudioBuffer& band) const;
  // ACE compression, then the envelope lowpass again; values in [0, 1].
  dsp::AudioBuffer Compress(const dsp::AudioBuffer& envelope) const;
  // y[n] = sum_b env_b[n] * sin(2*pi*carrier_b*n/fs).
  dsp::AudioBuffer Synthesize(const std::vector<dsp::AudioBuffer>& envelopes) const;
  // Full chain with output RMS matched to the input RMS. Silence stays silent.
  dsp::AudioBuffer Vocode(const dsp::AudioBuffer& x) const;

  // Post-lowpass envelope of one channel (0-based), before compression.
  dsp::AudioBuffer ChannelEnvelope(const dsp::AudioBuffer& x, int channel) const;

 private:
  void CheckRate(const dsp::AudioBuffer& x) const;

  VocoderConfig config_;
  int fs_;
  std::vector<dsp::BiquadCascade> bandpass_;
  dsp::BiquadCascade envelope_lpf_;
};

// Free-function forms.
std::vector<dsp::AudioBuffer> AnalyzeBands(const dsp::AudioBuffer& x, const VocoderConfig& cfg);
dsp::AudioBuffer ExtractEnvelope(const dsp::AudioBuffer& band, const VocoderConfig& cfg);
dsp::AudioBuffer AceCompress(const dsp::AudioBuffer& envelope, const AceParams& params);
dsp::AudioBuffer Synthesize(const std::vector<dsp::AudioBuffer>& envelopes, const VocoderConfig& cfg,
                            int fs);
dsp::AudioBuffer Vocode(const dsp::AudioBuffer& x, const VocoderConfig& cfg);

}  // namespace cisimkit::vocoder

#endif  // CISIMKIT_VOCODER_VOCODER_H_
