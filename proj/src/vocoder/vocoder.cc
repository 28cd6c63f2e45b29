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

#include "cisimkit/vocoder/vocoder.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cisimkit/error.h"

namespace cisimkit::vocoder {

void AceParams::Validate() const {
  Require(base_level >= 0.0 && base_level < saturation_level, "ACE needs 0 <= BL < SL");
  Require(steepness > 0.0, "ACE steepness must be positive");
  Require(frame_len >= 1, "ACE frame length must be at least 1");
  if (adapt) {
    Require(min_saturation_level > base_level && min_saturation_level <= saturation_level,
            "ACE min_saturation_level must lie in (BL, SL]");
    Require(release_ms > 0.0, "ACE release time must be positive");
  }
}

void VocoderConfig::Validate(int fs) const {
  Require(fs > 0, "sample rate must be positive");
  Require(band_edges_hz.size() >= 2, "vocoder needs at least two band edges");
  Require(carrier_hz.size() + 1 == band_edges_hz.size(),
          "vocoder needs one carrier per band (len(carriers) = len(edges) - 1)");
  for (std::size_t i = 0; i + 1 < band_edges_hz.size(); ++i) {
    Require(band_edges_hz[i] < band_edges_hz[i + 1], "band edges must be ascending");
    Require(carrier_hz[i] > band_edges_hz[i] && carrier_hz[i] < band_edges_hz[i + 1],
            "each carrier must lie strictly inside its band");
  }
  Require(band_edges_hz.front() > 0.0, "band edges must be positive");
  Require(band_edges_hz.back() < fs / 2.0, "band edges must lie below fs/2");
  Require(env_lpf_cutoff_hz > 0.0 && env_lpf_cutoff_hz < fs / 2.0,
          "envelope cutoff must lie inside (0, fs/2)");
  Require(pre_emphasis_coeff >= 0.0 && pre_emphasis_coeff <= 1.0,
          "pre-emphasis coefficient must lie in [0, 1]");
  Require(calibration_rms >= 0.0, "calibration RMS must be non-negative");
  ace.Validate();
}

VocoderConfig VocoderConfig::FromConfig(const KeyValueConfig& kv) {
  VocoderConfig c;
  if (auto v = kv.GetDoubleList("vocoder.band_edges")) c.band_edges_hz = *v;
  if (auto v = kv.GetDoubleList("vocoder.carriers")) c.carrier_hz = *v;
  if (auto v = kv.GetInt("vocoder.bandpass_order")) c.bandpass_order = *v;
  if (auto v = kv.GetInt("vocoder.env_lpf_order")) c.env_lpf_order = *v;
  if (auto v = kv.GetDouble("vocoder.env_lpf_cutoff")) c.env_lpf_cutoff_hz = *v;
  if (auto v = kv.GetDouble("vocoder.pre_emphasis")) c.pre_emphasis_coeff = *v;
  if (auto v = kv.GetDouble("vocoder.calibration_rms")) c.calibration_rms = *v;
  if (auto v = kv.GetDouble("ace.base_level")) c.ace.base_level = *v;
  if (auto v = kv.GetDouble("ace.saturation_level")) c.ace.saturation_level = *v;
  if (auto v = kv.GetDouble("ace.steepness")) c.ace.steepness = *v;
  if (auto v = kv.GetInt("ace.frame_len")) c.ace.frame_len = *v;
  if (auto v = kv.GetBool("ace.adapt")) c.ace.adapt = *v;
  if (auto v = kv.GetDouble("ace.min_saturation_level")) c.ace.min_saturation_level = *v;
  if (auto v = kv.GetDouble("ace.release_ms")) c.ace.release_ms = *v;
  return c;
}

KeyValueConfig VocoderConfig::ToConfig() const {
  KeyValueConfig kv;
  kv.Set("vocoder.band_edges", FormatList(band_edges_hz));
  kv.Set("vocoder.carriers", FormatList(carrier_hz));
  kv.Set("vocoder.bandpass_order", std::to_string(bandpass_order));
  kv.Set("vocoder.env_lpf_order", std::to_string(env_lpf_order));
  kv.Set("vocoder.env_lpf_cutoff", FormatNumber(env_lpf_cutoff_hz));
  kv.Set("vocoder.pre_emphasis", FormatNumber(pre_emphasis_coeff));
  kv.Set("vocoder.calibration_rms", FormatNumber(calibration_rms));
  kv.Set("ace.base_level", FormatNumber(ace.base_level));
  kv.Set("ace.saturation_level", FormatNumber(ace.saturation_level));
  kv.Set("ace.steepness", FormatNumber(ace.steepness));
  kv.Set("ace.frame_len", std::to_string(ace.frame_len));
  kv.Set("ace.adapt", ace.adapt ? "true" : "false");
  kv.Set("ace.min_saturation_level", FormatNumber(ace.min_saturation_level));
  kv.Set("ace.release_ms", FormatNumber(ace.release_ms));
  return kv;
}

double AceMap(double x, double base_level, double saturation_level, double steepness) {
  const double t = (std::clamp(x, base_level, saturation_level) - base_level) /
                   (saturation_level - base_level);
  return std::log1p(steepness * t) / std::log1p(steepness);
}

dsp::AudioBuffer AceCompress(const dsp::AudioBuffer& envelope, const AceParams& p) {
  p.Validate();
  const std::size_t n = envelope.size();
  dsp::AudioBuffer out(std::vector<double>(n), envelope.sample_rate);
  if (!p.adapt) {
    for (std::size_t i = 0; i < n; ++i) {
      out.samples[i] = AceMap(envelope.samples[i], p.base_level, p.saturation_level, p.steepness);
    }
    return out;
  }
  if (n == 0) return out;

  const std::size_t frame = static_cast<std::size_t>(p.frame_len);
  const std::size_t num_frames = (n + frame - 1) / frame;
  const double release =
      std::exp(-static_cast<double>(frame) / (envelope.sample_rate * p.release_ms * 1e-3));
  std::vector<double> level(num_frames);
  double tracker = 0.0;
  for (std::size_t f = 0; f < num_frames; ++f) {
    const auto begin = envelope.samples.begin() + static_cast<std::ptrdiff_t>(f * frame);
    const auto end = envelope.samples.begin() + static_cast<std::ptrdiff_t>(std::min(n, (f + 1) * frame));
    const double peak = *std::max_element(begin, end);
    tracker = std::max(peak, tracker * release);
    level[f] = std::clamp(tracker, p.min_saturation_level, p.saturation_level);
  }

  // Interpolate the per-frame saturation level between frame centres.
  const double half = 0.5 * static_cast<double>(frame);
  for (std::size_t i = 0; i < n; ++i) {
    const double pos = (static_cast<double>(i) + 0.5 - half) / static_cast<double>(frame);
    double sl;
    if (pos <= 0.0) {
      sl = level.front();
    } else if (pos >= static_cast<double>(num_frames - 1)) {
      sl = level.back();
    } else {
      const auto f = static_cast<std::size_t>(pos);
      const double w = pos - static_cast<double>(f);
      sl = (1.0 - w) * level[f] + w * level[f + 1];
    }
    out.samples[i] = AceMap(envelope.samples[i], p.base_level, sl, p.steepness);
  }
  return out;
}

Vocoder::Vocoder(VocoderConfig config, int fs) : config_(std::move(config)), fs_(fs) {
  config_.Validate(fs_);
  for (int b = 0; b < config_.num_channels(); ++b) {
    const double edges[2] = {config_.band_edges_hz[b], config_.band_edges_hz[b + 1]};
    bandpass_.push_back(
        dsp::DesignButterworth(config_.bandpass_order, dsp::FilterKind::kBandpass, edges, fs_));
  }
  const double cutoff[1] = {config_.env_lpf_cutoff_hz};
  envelope_lpf_ = dsp::DesignButterworth(config_.env_lpf_order, dsp::FilterKind::kLowpass, cutoff, fs_);
}

void Vocoder::CheckRate(const dsp::AudioBuffer& x) const {
  Require(x.sample_rate == fs_, "sample-rate mismatch: vocoder runs at " + std::to_string(fs_) +
                                    " Hz, signal is " + std::to_string(x.sample_rate) + " Hz");
}

std::vector<dsp::AudioBuffer> Vocoder::AnalyzeBands(const dsp::AudioBuffer& x) const {
  CheckRate(x);
  const dsp::AudioBuffer emphasized = dsp::PreEmphasis(x, config_.pre_emphasis_coeff);
  std::vector<dsp::AudioBuffer> bands;
  bands.reserve(bandpass_.size());
  for (const auto& bp : bandpass_) bands.push_back(dsp::ApplyFilter(emphasized, bp));
  return bands;
}

dsp::AudioBuffer Vocoder::ExtractEnvelope(const dsp::AudioBuffer& band) const {
  CheckRate(band);
  dsp::AudioBuffer env = dsp::FullWaveRectify(band);
  dsp::FilterInPlace(env.samples, envelope_lpf_);
  for (double& v : env.samples) v = std::max(v, 0.0);
  return env;
}

dsp::AudioBuffer Vocoder::Compress(const dsp::AudioBuffer& envelope) const {
  dsp::AudioBuffer out = AceCompress(envelope, config_.ace);
  // The log map sharpens the envelope near the base level and widens its
  // spectrum; a second pass of the envelope lowpass band-limits it again.
  dsp::FilterInPlace(out.samples, envelope_lpf_);
  for (double& v : out.samples) v = std::clamp(v, 0.0, 1.0);
  return out;
}

dsp::AudioBuffer Vocoder::Synthesize(const std::vector<dsp::AudioBuffer>& envelopes) const {
  Require(static_cast<int>(envelopes.size()) == config_.num_channels(),
          "one envelope per vocoder channel is required");
  const std::size_t n = envelopes.front().size();
  for (const auto& e : envelopes) Require(e.size() == n, "envelope length mismatch");
  dsp::AudioBuffer y(std::vector<double>(n, 0.0), fs_);
  for (int b = 0; b < config_.num_channels(); ++b) {
    const double carrier = config_.carrier_hz[b];
    for (std::size_t i = 0; i < n; ++i) {
      // Reduce n*f modulo fs before scaling so the phase stays exact for long signals.
      const double cycles = std::fmod(static_cast<double>(i) * carrier, static_cast<double>(fs_)) / fs_;
      y.samples[i] += envelopes[b].samples[i] * std::sin(2.0 * std::numbers::pi * cycles);
    }
  }
  return y;
}

dsp::AudioBuffer Vocoder::Vocode(const dsp::AudioBuffer& x) const {
  CheckRate(x);
  if (x.empty()) return x;
  const double rms_in = dsp::Rms(x);
  if (rms_in == 0.0) return dsp::AudioBuffer(std::vector<double>(x.size(), 0.0), fs_);

  dsp::AudioBuffer calibrated = x;
  if (config_.calibration_rms > 0.0) {
    for (double& v : calibrated.samples) v *= config_.calibration_rms / rms_in;
  }
  std::vector<dsp::AudioBuffer> envelopes;
  for (const auto& band : AnalyzeBands(calibrated)) envelopes.push_back(Compress(ExtractEnvelope(band)));
  dsp::AudioBuffer y = Synthesize(envelopes);
  const double rms_out = dsp::Rms(y);
  // Every channel below the base level leaves nothing to rescale.
  if (rms_out == 0.0) return y;
  const double gain = rms_in / rms_out;
  for (double& v : y.samples) v *= gain;
  return y;
}

dsp::AudioBuffer Vocoder::ChannelEnvelope(const dsp::AudioBuffer& x, int channel) const {
  Require(channel >= 0 && channel < config_.num_channels(), "channel out of range");
  CheckRate(x);
  const dsp::AudioBuffer emphasized = dsp::PreEmphasis(x, config_.pre_emphasis_coeff);
  return ExtractEnvelope(dsp::ApplyFilter(emphasized, bandpass_[channel]));
}

std::vector<dsp::AudioBuffer> AnalyzeBands(const dsp::AudioBuffer& x, const VocoderConfig& cfg) {
  return Vocoder(cfg, x.sample_rate).AnalyzeBands(x);
}

dsp::AudioBuffer ExtractEnvelope(const dsp::AudioBuffer& band, const VocoderConfig& cfg) {
  return Vocoder(cfg, band.sample_rate).ExtractEnvelope(band);
}

dsp::AudioBuffer Synthesize(const std::vector<dsp::AudioBuffer>& envelopes, const VocoderConfig& cfg,
                            int fs) {
  return Vocoder(cfg, fs).Synthesize(envelopes);
}

dsp::AudioBuffer Vocode(const dsp::AudioBuffer& x, const VocoderConfig& cfg) {
  return Vocoder(cfg, x.sample_rate).Vocode(x);
}

}  // namespace cisimkit::vocoder
