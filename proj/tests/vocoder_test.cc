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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "cisimkit/corpus/synthetic.h"
#include "cisimkit/dsp/fft.h"
#include "cisimkit/dsp/spectrogram.h"
#include "cisimkit/error.h"
#include "cisimkit/vocoder/vocoder.h"
#include "test_util.h"

namespace cisimkit::vocoder {
namespace {

using dsp::AudioBuffer;
using testing::Sine;
using testing::WhiteNoise;

// Fraction of signal energy within +/- half_width Hz of any carrier.
double SpectralMassNear(const AudioBuffer& y, const std::vector<double>& carriers, double half_width) {
  dsp::Fft fft(y.size());
  std::vector<std::complex<double>> bins(fft.num_bins());
  fft.Forward(y.samples, bins);
  double total = 0, near = 0;
  for (std::size_t k = 0; k < bins.size(); ++k) {
    const double p = std::norm(bins[k]);
    const double f = static_cast<double>(k) * y.sample_rate / y.size();
    total += p;
    for (double c : carriers) {
      if (std::abs(f - c) <= half_width) {
        near += p;
        break;
      }
    }
  }
  return near / total;
}

double Correlation(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= a.size(), mb /= b.size();
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

TEST(VocoderConfig, DefaultsAndValidation) {
  const VocoderConfig cfg;
  EXPECT_EQ(cfg.num_channels(), 4);
  EXPECT_NO_THROW(cfg.Validate(16000));
  EXPECT_THROW(cfg.Validate(11025), Error);  // 6 kHz edge above Nyquist

  VocoderConfig bad = cfg;
  bad.carrier_hz = {643, 1319, 2516};
  EXPECT_THROW(bad.Validate(16000), Error);
  bad = cfg;
  bad.carrier_hz[1] = 1800;  // outside 887..1750
  EXPECT_THROW(bad.Validate(16000), Error);
}

TEST(VocoderConfig, KeyValueRoundTrip) {
  VocoderConfig cfg;
  cfg.carrier_hz = {600, 1300, 2500, 4600};
  cfg.ace.adapt = false;
  const KeyValueConfig kv = KeyValueConfig::Parse(cfg.ToConfig().ToString());
  const VocoderConfig back = VocoderConfig::FromConfig(kv);
  EXPECT_EQ(back.carrier_hz, cfg.carrier_hz);
  EXPECT_EQ(back.band_edges_hz, cfg.band_edges_hz);
  EXPECT_FALSE(back.ace.adapt);
  EXPECT_EQ(back.ace.steepness, cfg.ace.steepness);
  const std::string text = cfg.ToConfig().ToString();
  EXPECT_NE(text.find("band_edges = [400, 887, 1750, 3282, 6000]"), std::string::npos);
}

TEST(Vocoder, ChannelCountFollowsConfig) {
  VocoderConfig cfg;
  cfg.band_edges_hz = {300, 1000, 3000};
  cfg.carrier_hz = {600, 2000};
  const Vocoder v(cfg, 16000);
  EXPECT_EQ(v.AnalyzeBands(Sine(600, 0.1, 16000)).size(), 2u);
  EXPECT_EQ(Vocoder(VocoderConfig{}, 16000).AnalyzeBands(Sine(600, 0.1, 16000)).size(), 4u);
}

TEST(Vocoder, AnalyzeBandsSelectsTheRightChannel) {
  const Vocoder v(VocoderConfig{}, 16000);
  const auto low = v.AnalyzeBands(Sine(600, 0.5, 16000, 0.5));
  for (int b = 1; b < 4; ++b) EXPECT_GT(dsp::Rms(low[0]), 10.0 * dsp::Rms(low[b]));
  const auto mid = v.AnalyzeBands(Sine(2500, 0.5, 16000, 0.5));
  for (int b : {0, 1, 3}) EXPECT_GT(dsp::Rms(mid[2]), dsp::Rms(mid[b]));
  for (const auto& band : v.AnalyzeBands(AudioBuffer(std::vector<double>(800, 0.0), 16000))) {
    for (double s : band.samples) EXPECT_EQ(s, 0.0);
  }
}

TEST(Vocoder, EnvelopeOfUnitSine) {
  const Vocoder v(VocoderConfig{}, 16000);
  const AudioBuffer env = v.ExtractEnvelope(Sine(1000, 0.5, 16000));
  // Steady state after 50 ms settling.
  double mean = 0;
  std::size_t count = 0;
  for (std::size_t i = 800; i < env.size(); ++i, ++count) mean += env.samples[i];
  mean /= count;
  EXPECT_NEAR(mean, 2.0 / std::numbers::pi, 0.05);
  for (double s : env.samples) EXPECT_GE(s, 0.0);

  const AudioBuffer zero = v.ExtractEnvelope(AudioBuffer(std::vector<double>(400, 0.0), 16000));
  for (double s : zero.samples) EXPECT_EQ(s, 0.0);
}

TEST(Vocoder, EnvelopeTracksModulator) {
  const int fs = 16000;
  const Vocoder v(VocoderConfig{}, fs);
  AudioBuffer am = Sine(1000, 1.0, fs);
  std::vector<double> modulator(am.size());
  for (std::size_t i = 0; i < am.size(); ++i) {
    modulator[i] = 1.0 + 0.8 * std::sin(2.0 * std::numbers::pi * 10.0 * i / fs);
    am.samples[i] *= modulator[i];
  }
  const AudioBuffer env = v.ExtractEnvelope(am);
  const std::vector<double> e(env.samples.begin() + 800, env.samples.end());
  const std::vector<double> m(modulator.begin() + 800, modulator.end());
  EXPECT_GT(Correlation(e, m), 0.95);
}

TEST(AceCompress, MapEndpointsAndMonotone) {
  AceParams p;
  EXPECT_EQ(AceMap(0.0, p.base_level, p.saturation_level, p.steepness), 0.0);
  EXPECT_EQ(AceMap(p.base_level, p.base_level, p.saturation_level, p.steepness), 0.0);
  EXPECT_DOUBLE_EQ(AceMap(p.saturation_level, p.base_level, p.saturation_level, p.steepness), 1.0);
  EXPECT_DOUBLE_EQ(AceMap(3.0, p.base_level, p.saturation_level, p.steepness), 1.0);
  double previous = -1.0;
  for (int i = 0; i < 1000; ++i) {
    const double x = i * 0.7 / 999.0;
    const double y = AceMap(x, p.base_level, p.saturation_level, p.steepness);
    EXPECT_GE(y, previous);
    previous = y;
  }
}

TEST(AceCompress, OutputInUnitRangeForBothModes) {
  for (bool adapt : {false, true}) {
    AceParams p;
    p.adapt = adapt;
    std::mt19937_64 rng(4);
    std::exponential_distribution<double> dist(4.0);
    AudioBuffer env(std::vector<double>(4000), 16000);
    for (double& v : env.samples) v = dist(rng);
    const AudioBuffer out = AceCompress(env, p);
    for (double v : out.samples) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(AceCompress, AdaptiveLevelStaysInPresetRange) {
  AceParams p;
  const AudioBuffer loud(std::vector<double>(2000, 5.0), 16000);
  for (double v : AceCompress(loud, p).samples) EXPECT_DOUBLE_EQ(v, 1.0);
  // A quiet constant envelope saturates against the lower clamp of SL.
  const AudioBuffer quiet(std::vector<double>(2000, p.min_saturation_level), 16000);
  for (double v : AceCompress(quiet, p).samples) EXPECT_DOUBLE_EQ(v, 1.0);
  const AudioBuffer floor(std::vector<double>(2000, p.base_level), 16000);
  for (double v : AceCompress(floor, p).samples) EXPECT_EQ(v, 0.0);
}

TEST(Synthesize, PureToneAndSilence) {
  VocoderConfig one;
  one.band_edges_hz = {500, 800};
  one.carrier_hz = {643};
  const AudioBuffer ones(std::vector<double>(16000, 1.0), 16000);
  const AudioBuffer tone = Synthesize({ones}, one, 16000);
  EXPECT_NEAR(dsp::Rms(tone), 1.0 / std::sqrt(2.0), 1e-3);
  EXPECT_DOUBLE_EQ(tone.samples[0], 0.0);  // phase starts at zero

  const VocoderConfig cfg;
  const AudioBuffer zeros(std::vector<double>(1000, 0.0), 16000);
  const AudioBuffer silent = Synthesize({zeros, zeros, zeros, zeros}, cfg, 16000);
  for (double v : silent.samples) EXPECT_EQ(v, 0.0);

  AudioBuffer shorter(std::vector<double>(999, 0.0), 16000);
  EXPECT_THROW(Synthesize({zeros, zeros, shorter, zeros}, cfg, 16000), Error);
}

TEST(Synthesize, TwoCarriersGiveTwoPeaks) {
  const VocoderConfig cfg;
  const AudioBuffer ones(std::vector<double>(16000, 1.0), 16000);
  const AudioBuffer zeros(std::vector<double>(16000, 0.0), 16000);
  const AudioBuffer y = Synthesize({ones, zeros, ones, zeros}, cfg, 16000);
  // 1 Hz resolution over one second: peaks at exactly 643 and 2516 Hz.
  dsp::Fft fft(16000);
  std::vector<std::complex<double>> bins(fft.num_bins());
  fft.Forward(y.samples, bins);
  std::vector<double> power;
  for (int f = 0; f < 8000; ++f) power.push_back(std::norm(bins[f]));
  std::vector<int> peaks;
  const double top = *std::max_element(power.begin(), power.end());
  for (int f = 1; f + 1 < 8000; ++f) {
    if (power[f] > 0.1 * top && power[f] >= power[f - 1] && power[f] >= power[f + 1]) peaks.push_back(f);
  }
  EXPECT_EQ(peaks, (std::vector<int>{643, 2516}));
}

TEST(Vocode, SilenceToneAndRms) {
  const Vocoder v(VocoderConfig{}, 16000);
  const AudioBuffer silence(std::vector<double>(4000, 0.0), 16000);
  for (double s : v.Vocode(silence).samples) EXPECT_EQ(s, 0.0);

  const AudioBuffer tone = Sine(600, 1.0, 16000, 0.5);
  const AudioBuffer out = v.Vocode(tone);
  EXPECT_NEAR(dsp::Rms(out), dsp::Rms(tone), 1e-3 * dsp::Rms(tone));
  const dsp::SpectrogramMatrix s = dsp::Spectrogram(out, 16000, 16000);
  EXPECT_NEAR(s.bin_hz(s.ArgmaxBin(0)), 643.0, 1.0);
}

TEST(Vocode, WhiteNoiseEnergyStaysNearCarriersAtAnyLevel) {
  const VocoderConfig cfg;
  const Vocoder v(cfg, 16000);
  // Each carrier is amplitude-modulated by an envelope band-limited to the
  // envelope lowpass cutoff, so the sidebands reach cutoff Hz on either side.
  const double half_width = cfg.env_lpf_cutoff_hz + 50.0;
  for (double level : {0.01, 0.05, 0.1, 0.3, 1.0}) {
    for (std::uint64_t seed : {77u, 78u, 79u}) {
      const AudioBuffer out = v.Vocode(WhiteNoise(2.0, 16000, level, seed));
      EXPECT_GE(SpectralMassNear(out, cfg.carrier_hz, half_width), 0.99) << "noise rms " << level;
    }
  }
}

TEST(Vocode, NarrowEnvelopeLowpassConcentratesWithinFiftyHertz) {
  VocoderConfig cfg;
  cfg.env_lpf_cutoff_hz = 30.0;
  const Vocoder v(cfg, 16000);
  for (double level : {0.05, 0.1, 0.3}) {
    const AudioBuffer out = v.Vocode(WhiteNoise(2.0, 16000, level, 77));
    EXPECT_GE(SpectralMassNear(out, cfg.carrier_hz, 50.0), 0.99) << "noise rms " << level;
  }
}

TEST(Vocode, OutputScalesWithInputGain) {
  const Vocoder v(VocoderConfig{}, 16000);
  const AudioBuffer x = WhiteNoise(0.5, 16000, 0.1, 3);
  AudioBuffer louder = x;
  for (double& s : louder.samples) s *= 4.0;
  const AudioBuffer a = v.Vocode(x);
  const AudioBuffer b = v.Vocode(louder);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b.samples[i], 4.0 * a.samples[i], 1e-9);
}

TEST(Vocode, SpectralSupportForArbitraryInputs) {
  const VocoderConfig cfg;
  const Vocoder v(cfg, 16000);
  const double half_width = cfg.env_lpf_cutoff_hz + 50.0;
  std::vector<AudioBuffer> inputs{WhiteNoise(1.0, 16000, 0.2, 1), Sine(1000, 1.0, 16000, 0.3),
                                  Sine(3000, 1.0, 16000, 0.05)};
  AudioBuffer chirp(std::vector<double>(16000), 16000);
  for (std::size_t i = 0; i < chirp.size(); ++i) {
    const double t = i / 16000.0;
    chirp.samples[i] = 0.4 * std::sin(2.0 * std::numbers::pi * (200.0 * t + 2500.0 * t * t));
  }
  inputs.push_back(chirp);
  inputs.push_back(corpus::SyntheticUtterance(5, 2.0));
  inputs.push_back(corpus::StreetNoise(6, 2.0));
  inputs.push_back(corpus::EngineNoise(7, 2.0));
  for (const auto& x : inputs) EXPECT_GE(SpectralMassNear(v.Vocode(x), cfg.carrier_hz, half_width), 0.99);
}

TEST(Vocode, RmsPreservedAndDeterministic) {
  const Vocoder v(VocoderConfig{}, 16000);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> level(0.05, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    const AudioBuffer x = WhiteNoise(0.5, 16000, level(rng), 500 + trial);
    const AudioBuffer a = v.Vocode(x);
    EXPECT_LT(std::abs(dsp::Rms(a) - dsp::Rms(x)) / dsp::Rms(x), 1e-3);
    EXPECT_EQ(a.samples, v.Vocode(x).samples);
  }
}

}  // namespace
}  // namespace cisimkit::vocoder
