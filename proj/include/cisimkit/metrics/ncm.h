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

#ifndef CISIMKIT_METRICS_NCM_H_
#define CISIMKIT_METRICS_NCM_H_

#include <vector>

#include "cisimkit/dsp/audio.h"
#include "cisimkit/dsp/butterworth.h"

namespace cisimkit::metrics {

struct NcmConfig {
  int num_bands = 20;
  double low_hz = 300.0;
  double high_hz = 3400.0;
  int bandpass_order = 4;
  int envelope_order = 2;
  double envelope_cutoff_hz = 25.0;
  int envelope_rate_hz = 100;
  double snr_clamp_db = 15.0;
  std::vector<double> weights;  // empty means all ones; otherwise 0/1 per band

  void Validate() const;
  // Log-spaced band edges, num_bands + 1 values.
  std::vector<double> BandEdges() const;
};

struct NcmResult {
  double score = 0.0;
  std::vector<double> transmission_index;  // per band; NaN for skipped bands
  int skipped_bands = 0;                   // clean envelope with zero variance
};

// Normalized covariance measure in [0, 1]: per band, the Pearson
// correlation r of the clean and processed envelopes gives an apparent SNR
// 10*log10(r^2 / (1 - r^2)), clamped to +/-snr_clamp_db and mapped linearly
// to a transmission index in [0, 1]; the score is their weighted mean.
class NcmEvaluator {
 public:
  NcmEvaluator(NcmConfig cfg, int fs);
  NcmResult Evaluate(const dsp::AudioBuffer& clean, const dsp::AudioBuffer& processed) const;
  // Envelope of one band at the envelope rate.
  std::vector<double> BandEnvelope(const dsp::AudioBuffer& x, int band) const;

 private:
  NcmConfig cfg_;
  int fs_;
  std::vector<dsp::BiquadCascade> bank_;
  dsp::BiquadCascade envelope_lpf_;
};

double Ncm(const dsp::AudioBuffer& clean, const dsp::AudioBuffer& processed, const NcmConfig& cfg = {});

// Apparent-SNR transmission index for one correlation value.
double TransmissionIndex(double r, double clamp_db);

}  // namespace cisimkit::metrics

#endif  // CISIMKIT_METRICS_NCM_H_
