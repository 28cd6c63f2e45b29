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

#include "cisimkit/metrics/ncm.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cisimkit/error.h"

namespace cisimkit::metrics {

void NcmConfig::Validate() const {
  Require(num_bands >= 1, "NCM needs at least one band");
  Require(low_hz > 0.0 && low_hz < high_hz, "NCM band range must satisfy 0 < low < high");
  Require(envelope_cutoff_hz > 0.0 && envelope_rate_hz > 0, "NCM envelope settings must be positive");
  Require(snr_clamp_db > 0.0, "NCM SNR clamp must be positive");
  if (!weights.empty()) {
    Require(static_cast<int>(weights.size()) == num_bands, "NCM needs one weight per band");
    bool any = false;
    for (double w : weights) {
      Require(w == 0.0 || w == 1.0, "NCM weights must be 0 or 1");
      any = any || w == 1.0;
    }
    Require(any, "NCM needs at least one band with weight 1");
  }
}

std::vector<double> NcmConfig::BandEdges() const {
  std::vector<double> edges(static_cast<std::size_t>(num_bands) + 1);
  for (int i = 0; i <= num_bands; ++i) {
    edges[i] = low_hz * std::pow(high_hz / low_hz, static_cast<double>(i) / num_bands);
  }
  return edges;
}

double TransmissionIndex(double r, double clamp_db) {
  const double r2 = r * r;
  double snr;
  if (r2 >= 1.0) {
    snr = clamp_db;
  } else if (r2 == 0.0) {
    snr = -clamp_db;
  } else {
    snr = std::clamp(10.0 * std::log10(r2 / (1.0 - r2)), -clamp_db, clamp_db);
  }
  return (snr + clamp_db) / (2.0 * clamp_db);
}

NcmEvaluator::NcmEvaluator(NcmConfig cfg, int fs) : cfg_(std::move(cfg)), fs_(fs) {
  cfg_.Validate();
  Require(cfg_.high_hz < fs / 2.0, "NCM bands must lie below fs/2");
  Require(cfg_.envelope_rate_hz <= fs, "NCM envelope rate must not exceed the sample rate");
  const std::vector<double> edges = cfg_.BandEdges();
  for (int b = 0; b < cfg_.num_bands; ++b) {
    const double band[2] = {edges[b], edges[b + 1]};
    bank_.push_back(dsp::DesignButterworth(cfg_.bandpass_order, dsp::FilterKind::kBandpass, band, fs_));
  }
  const double cutoff[1] = {cfg_.envelope_cutoff_hz};
  envelope_lpf_ = dsp::DesignButterworth(cfg_.envelope_order, dsp::FilterKind::kLowpass, cutoff, fs_);
}

std::vector<double> NcmEvaluator::BandEnvelope(const dsp::AudioBuffer& x, int band) const {
  Require(x.sample_rate == fs_, "sample-rate mismatch in NCM");
  std::vector<double> v = x.samples;
  dsp::FilterInPlace(v, bank_.at(static_cast<std::size_t>(band)));
  for (double& s : v) s = std::abs(s);
  dsp::FilterInPlace(v, envelope_lpf_);
  // Pick samples at the envelope rate; the 25 Hz lowpass already removes
  // what would alias at 100 Hz.
  std::vector<double> out;
  for (std::size_t m = 0;; ++m) {
    const auto idx = static_cast<std::size_t>(static_cast<double>(m) * fs_ / cfg_.envelope_rate_hz);
    if (idx >= v.size()) break;
    out.push_back(v[idx]);
  }
  return out;
}

NcmResult NcmEvaluator::Evaluate(const dsp::AudioBuffer& clean, const dsp::AudioBuffer& processed) const {
  Require(clean.size() == processed.size(), "length mismatch: clean has " + std::to_string(clean.size()) +
                                                " samples, processed has " + std::to_string(processed.size()));
  Require(dsp::Rms(clean) > 0.0, "clean signal is silent");
  NcmResult res;
  double num = 0.0, den = 0.0;
  for (int b = 0; b < cfg_.num_bands; ++b) {
    const double w = cfg_.weights.empty() ? 1.0 : cfg_.weights[b];
    if (w == 0.0) {
      res.transmission_index.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const std::vector<double> ex = BandEnvelope(clean, b);
    const std::vector<double> ey = BandEnvelope(processed, b);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < ex.size(); ++i) mx += ex[i], my += ey[i];
    mx /= static_cast<double>(ex.size());
    my /= static_cast<double>(ey.size());
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < ex.size(); ++i) {
      sxy += (ex[i] - mx) * (ey[i] - my);
      sxx += (ex[i] - mx) * (ex[i] - mx);
      syy += (ey[i] - my) * (ey[i] - my);
    }
    if (!(sxx > 0.0)) {
      ++res.skipped_bands;
      res.transmission_index.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    const double r = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 0.0;
    const double ti = TransmissionIndex(r, cfg_.snr_clamp_db);
    res.transmission_index.push_back(ti);
    num += w * ti;
    den += w;
  }
  Require(den > 0.0, "NCM: every weighted band has a zero-variance clean envelope");
  res.score = num / den;
  return res;
}

double Ncm(const dsp::AudioBuffer& clean, const dsp::AudioBuffer& processed, const NcmConfig& cfg) {
  Require(clean.sample_rate == processed.sample_rate, "sample-rate mismatch between clean and processed");
  return NcmEvaluator(cfg, clean.sample_rate).Evaluate(clean, processed).score;
}

}  // namespace cisimkit::metrics
