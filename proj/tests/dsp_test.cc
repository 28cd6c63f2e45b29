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
#include <fstream>
#include <numbers>
#include <random>

#include "cisimkit/dsp/audio.h"
#include "cisimkit/dsp/butterworth.h"
#include "cisimkit/dsp/resample.h"
#include "cisimkit/dsp/spectrogram.h"
#include "cisimkit/dsp/wav_io.h"
#include "cisimkit/error.h"
#include "test_util.h"

namespace cisimkit::dsp {
namespace {

using testing::Sine;
using testing::WhiteNoise;

// Closed-form squared magnitude of a bilinear-transformed Butterworth filter.
double OracleMagnitudeDb(FilterKind kind, int order, const std::vector<double>& cutoffs, double fs,
                         double f) {
  const auto warp = [fs](double hz) { return 2.0 * fs * std::tan(std::numbers::pi * hz / fs); };
  const double w = warp(f);
  double ratio;
  if (kind == FilterKind::kLowpass) {
    ratio = w / warp(cutoffs[0]);
  } else {
    const double w1 = warp(cutoffs[0]), w2 = warp(cutoffs[1]);
    ratio = (w * w - w1 * w2) / (w * (w2 - w1));
  }
  return -10.0 * std::log10(1.0 + std::pow(ratio * ratio, order));
}

TEST(PreEmphasis, MatchesDirectFormula) {
  const AudioBuffer ones({1, 1, 1}, 16000);
  const AudioBuffer y = PreEmphasis(ones, 0.97);
  EXPECT_DOUBLE_EQ(y.samples[0], 1.0);
  EXPECT_NEAR(y.samples[1], 0.03, 1e-15);
  EXPECT_NEAR(y.samples[2], 0.03, 1e-15);

  const AudioBuffer impulse({1, 0, 0}, 16000);
  const AudioBuffer z = PreEmphasis(impulse, 0.97);
  EXPECT_EQ(z.samples, (std::vector<double>{1.0, -0.97, 0.0}));

  EXPECT_EQ(PreEmphasis(ones, 0.0).samples, ones.samples);
  EXPECT_THROW(PreEmphasis(ones, 1.5), Error);
}

TEST(Rectify, AbsoluteValueAndMean) {
  const AudioBuffer x({-1, 2, -3}, 16000);
  EXPECT_EQ(FullWaveRectify(x).samples, (std::vector<double>{1, 2, 3}));
  const AudioBuffer zeros(std::vector<double>(8, 0.0), 16000);
  EXPECT_EQ(FullWaveRectify(zeros).samples, zeros.samples);
  // 100 Hz at 16 kHz: 1 s holds whole periods.
  const AudioBuffer r = FullWaveRectify(Sine(100, 1.0, 16000));
  double mean = 0;
  for (double v : r.samples) mean += v;
  mean /= r.size();
  EXPECT_NEAR(mean, 2.0 / std::numbers::pi, 0.01);
}

TEST(Rms, KnownValues) {
  EXPECT_DOUBLE_EQ(Rms(AudioBuffer({1, -1, 1, -1}, 8000)), 1.0);
  EXPECT_DOUBLE_EQ(Rms(AudioBuffer(std::vector<double>(5, 0.0), 8000)), 0.0);
  EXPECT_NEAR(Rms(Sine(250, 1.0, 16000, 0.3)), 0.3 / std::sqrt(2.0), 1e-3);
  EXPECT_THROW(Rms(AudioBuffer({}, 8000)), Error);
}

TEST(Butterworth, LowpassUnityDcAndHalfPowerCutoff) {
  const double fc[1] = {400};
  const BiquadCascade lp = DesignButterworth(2, FilterKind::kLowpass, fc, 16000);
  EXPECT_NEAR(std::abs(lp.Response(0.0)), 1.0, 1e-12);
  EXPECT_NEAR(lp.MagnitudeDb(400), -3.0103, 0.1);
}

TEST(Butterworth, VocoderBandEdges) {
  const double edges[2] = {400, 887};
  const BiquadCascade bp = DesignButterworth(3, FilterKind::kBandpass, edges, 16000);
  EXPECT_EQ(bp.sections.size(), 3u);
  EXPECT_NEAR(bp.MagnitudeDb(400), -3.0103, 0.2);
  EXPECT_NEAR(bp.MagnitudeDb(887), -3.0103, 0.2);
  EXPECT_LT(bp.MagnitudeDb(100), -30.0);
  EXPECT_LT(bp.MagnitudeDb(4000), -30.0);
}

TEST(Butterworth, MatchesClosedFormAcrossOrdersAndRates) {
  for (double fs : {16000.0, 48000.0}) {
    for (int order = 1; order <= 6; ++order) {
      const std::vector<double> lp_cut{400};
      const std::vector<double> bp_cut{1750, 3282};
      const auto lp = DesignButterworth(order, FilterKind::kLowpass, lp_cut, fs);
      const auto bp = DesignButterworth(order, FilterKind::kBandpass, bp_cut, fs);
      for (double f : {50.0, 400.0, 1000.0, 1750.0, 2400.0, 3282.0, 5000.0, 7000.0}) {
        EXPECT_NEAR(lp.MagnitudeDb(f), OracleMagnitudeDb(FilterKind::kLowpass, order, lp_cut, fs, f),
                    1e-6)
            << "lowpass order " << order << " f " << f;
        EXPECT_NEAR(bp.MagnitudeDb(f), OracleMagnitudeDb(FilterKind::kBandpass, order, bp_cut, fs, f),
                    1e-6)
            << "bandpass order " << order << " f " << f;
      }
    }
  }
}

TEST(Butterworth, AllPolesInsideUnitCircle) {
  const std::vector<std::vector<double>> bands{{400, 887}, {887, 1750}, {1750, 3282}, {3282, 6000},
                                               {300, 330}, {20, 40}};
  for (double fs : {16000.0, 48000.0}) {
    for (int order = 1; order <= 6; ++order) {
      for (const auto& band : bands) {
        for (double m : DesignButterworth(order, FilterKind::kBandpass, band, fs).PoleMagnitudes()) {
          EXPECT_LT(m, 1.0 - 1e-9);
        }
      }
      const double cut[1] = {25.0};
      for (double m : DesignButterworth(order, FilterKind::kLowpass, cut, fs).PoleMagnitudes()) {
        EXPECT_LT(m, 1.0 - 1e-9);
      }
    }
  }
}

TEST(Butterworth, RejectsBadCutoffs) {
  const double at_nyquist[1] = {8000};
  EXPECT_THROW(DesignButterworth(2, FilterKind::kLowpass, at_nyquist, 16000), Error);
  const double descending[2] = {900, 400};
  EXPECT_THROW(DesignButterworth(3, FilterKind::kBandpass, descending, 16000), Error);
  const double ok[1] = {400};
  EXPECT_THROW(DesignButterworth(7, FilterKind::kLowpass, ok, 16000), Error);
}

TEST(ApplyFilter, ZeroInIdentityAndAttenuation) {
  const double fc[1] = {400};
  const auto lp = DesignButterworth(2, FilterKind::kLowpass, fc, 16000);
  const AudioBuffer zeros(std::vector<double>(100, 0.0), 16000);
  EXPECT_EQ(ApplyFilter(zeros, lp).samples, zeros.samples);

  BiquadCascade pass;
  pass.sections.push_back(Biquad{});
  pass.fs_hz = 16000;
  AudioBuffer impulse(std::vector<double>(16, 0.0), 16000);
  impulse.samples[0] = 1.0;
  EXPECT_EQ(ApplyFilter(impulse, pass).samples, impulse.samples);

  const AudioBuffer tone = Sine(5000, 1.0, 16000);
  const AudioBuffer out = ApplyFilter(tone, lp);
  EXPECT_EQ(out.size(), tone.size());
  EXPECT_LT(20.0 * std::log10(Rms(out) / Rms(tone)), -40.0);

  EXPECT_THROW(ApplyFilter(Sine(100, 0.1, 48000), lp), Error);
}

TEST(ApplyFilter, Linearity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  const double edges[2] = {887, 1750};
  const auto bp = DesignButterworth(3, FilterKind::kBandpass, edges, 16000);
  for (int trial = 0; trial < 10; ++trial) {
    const AudioBuffer x = WhiteNoise(0.2, 16000, 0.3, 100 + trial);
    const AudioBuffer y = WhiteNoise(0.2, 16000, 0.3, 200 + trial);
    const double a = coef(rng), b = coef(rng);
    AudioBuffer mix = x;
    for (std::size_t i = 0; i < mix.size(); ++i) mix.samples[i] = a * x.samples[i] + b * y.samples[i];
    const AudioBuffer lhs = ApplyFilter(mix, bp);
    const AudioBuffer fx = ApplyFilter(x, bp), fy = ApplyFilter(y, bp);
    double scale = 0;
    for (double v : lhs.samples) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < mix.size(); ++i) {
      EXPECT_NEAR(lhs.samples[i], a * fx.samples[i] + b * fy.samples[i], 1e-9 * scale);
    }
  }
}

TEST(Resample, IdentityWhenRatesMatch) {
  const AudioBuffer x = WhiteNoise(0.1, 16000, 0.1, 3);
  EXPECT_EQ(Resample(x, 16000).samples, x.samples);
}

TEST(Resample, KeepsToneFrequency) {
  const AudioBuffer y = Resample(Sine(440, 1.0, 48000, 0.5), 16000);
  EXPECT_EQ(y.sample_rate, 16000);
  EXPECT_LE(std::abs(static_cast<long>(y.size()) - 16000), 1);
  const SpectrogramMatrix s = Spectrogram(y, 512, 256);
  const double bin_hz = 16000.0 / 512;
  for (std::size_t f = 0; f < s.frames; ++f) {
    EXPECT_NEAR(s.bin_hz(s.ArgmaxBin(f)), 440.0, bin_hz);
  }
}

TEST(Resample, RejectsAboveNewNyquist) {
  const AudioBuffer x = Sine(7000, 1.0, 48000);
  const AudioBuffer y = Resample(x, 10000);
  EXPECT_LT(Rms(y), 0.01 * Rms(x));
}

TEST(Resample, PreservesEnergyOfBandLimitedSignals) {
  const std::vector<std::pair<int, int>> rates{{48000, 16000}, {16000, 10000}, {10000, 16000},
                                               {48000, 10000}, {22050, 16000}};
  for (const auto& [fs_in, fs_out] : rates) {
    const double limit = 0.4 * std::min(fs_in, fs_out) / 2.0;
    AudioBuffer x(std::vector<double>(static_cast<std::size_t>(fs_in), 0.0), fs_in);
    for (double f : {0.13 * limit, 0.5 * limit, 0.97 * limit}) {
      const AudioBuffer s = Sine(f, 1.0, fs_in, 0.2, 0.3);
      for (std::size_t i = 0; i < x.size(); ++i) x.samples[i] += s.samples[i];
    }
    const AudioBuffer y = Resample(x, fs_out);
    EXPECT_NEAR(Rms(y) / Rms(x), 1.0, 0.01) << fs_in << " -> " << fs_out;
    const double expected = static_cast<double>(x.size()) * fs_out / fs_in;
    EXPECT_LE(std::abs(static_cast<double>(y.size()) - expected), 1.0);
  }
}

// Reference values from scipy.signal.resample_poly and from the
// Octave-compatible resampler in pystoi, on a deterministic chirp.
TEST(Resample, MatchesFrozenReferenceValues) {
  std::vector<double> x(1600);
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double t = static_cast<double>(n);
    x[n] = std::sin(0.003 * t * t / 7.0) + 0.3 * std::cos(0.05 * t);
  }
  const std::vector<std::size_t> idx{0, 1, 7, 100, 333, 500, 998, 999};
  const std::vector<double> scipy{0.24384415469400761, 0.31659302429186603, 0.30879241098027538,
                                  -1.0443197014884329, 0.77795841410662092, -1.0237714741870509,
                                  -0.51797932933238733, 0.83809660013510134};
  const std::vector<double> octave{0.24377194459458382, 0.31690115031423011, 0.31049307565930773,
                                   -1.0434357803315142, 0.77769687369930895, -1.0234146716239327,
                                   -0.51505404250641107, 0.83753379153973606};
  const std::vector<double> a = Resampler(16000, 10000).Apply(x);
  const std::vector<double> b = Resampler(16000, 10000, Resampler::Design::kOctave).Apply(x);
  ASSERT_EQ(a.size(), 1000u);
  ASSERT_EQ(b.size(), 1000u);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    EXPECT_NEAR(a[idx[k]], scipy[k], 1e-12) << idx[k];
    EXPECT_NEAR(b[idx[k]], octave[k], 1e-12) << idx[k];
  }
  const std::vector<double> up = Resampler(22050, 16000).Apply(std::span(x).first(441));
  ASSERT_EQ(up.size(), 320u);
  EXPECT_NEAR(up[0], 0.25889914071631109, 1e-12);
  EXPECT_NEAR(up[5], 0.30449223876428699, 1e-12);
  EXPECT_NEAR(up[100], 1.2066964662374324, 1e-12);
  EXPECT_NEAR(up[319], 0.642516646603705, 1e-12);
}

TEST(Resample, TransposeIsAdjoint) {
  // <R x, g> == <x, R^T g> for random x, g.
  const Resampler r(16000, 10000);
  const AudioBuffer x = WhiteNoise(0.05, 16000, 1.0, 5);
  const AudioBuffer g = WhiteNoise(1.0, 16000, 1.0, 6);
  const std::vector<double> rx = r.Apply(x.samples);
  const std::vector<double> gy(g.samples.begin(), g.samples.begin() + static_cast<long>(rx.size()));
  const std::vector<double> rtg = r.ApplyTranspose(gy, x.size());
  double lhs = 0, rhs = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) lhs += rx[i] * gy[i];
  for (std::size_t i = 0; i < x.size(); ++i) rhs += x.samples[i] * rtg[i];
  EXPECT_NEAR(lhs, rhs, 1e-9 * std::abs(lhs));
}

TEST(Spectrogram, ShapeLawAndPeaks) {
  const AudioBuffer zeros(std::vector<double>(2000, 0.0), 16000);
  const SpectrogramMatrix z = Spectrogram(zeros, 512, 256);
  for (double v : z.magnitudes) EXPECT_EQ(v, 0.0);

  for (std::size_t n : {512u, 513u, 767u, 768u, 1000u, 4097u}) {
    for (std::size_t hop : {1u, 100u, 256u, 512u}) {
      const SpectrogramMatrix s = Spectrogram(AudioBuffer(std::vector<double>(n, 0.1), 16000), 512, hop);
      EXPECT_EQ(s.frames, (n - 512) / hop + 1);
      EXPECT_EQ(s.bins, 257u);
    }
  }

  const SpectrogramMatrix tone = Spectrogram(Sine(1000, 0.5, 16000), 512, 256);
  for (std::size_t f = 0; f < tone.frames; ++f) EXPECT_EQ(tone.ArgmaxBin(f), 32u);

  const SpectrogramMatrix two = Spectrogram(testing::Concat(Sine(500, 0.5, 16000), Sine(2000, 0.5, 16000)), 512, 256);
  EXPECT_NE(two.ArgmaxBin(0), two.ArgmaxBin(two.frames - 1));

  EXPECT_THROW(Spectrogram(AudioBuffer(std::vector<double>(100, 0.0), 16000), 512, 256), Error);
}

TEST(Spectrogram, ExportsCsvAndPgm) {
  const auto dir = testing::ScratchDir("spectrogram");
  const SpectrogramMatrix s = Spectrogram(Sine(1000, 0.2, 16000), 512, 256);
  WriteSpectrogramCsv(dir / "s.csv", s);
  std::ifstream csv(dir / "s.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header.rfind("time_s,bin_0,bin_1,", 0), 0u);
  EXPECT_NE(header.find(",bin_256"), std::string::npos);

  const SpectrogramMatrix db = ToDecibels(s);
  WriteSpectrogramPgm(dir / "s.pgm", db);
  std::ifstream pgm(dir / "s.pgm", std::ios::binary);
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  pgm >> magic >> w >> h >> maxval;
  EXPECT_EQ(magic, "P5");
  EXPECT_EQ(w, s.frames);
  EXPECT_EQ(h, s.bins);
  EXPECT_EQ(maxval, 255u);
}

TEST(Wav, Float32RoundTripIsExact) {
  const auto dir = testing::ScratchDir("wav_f32");
  AudioBuffer x = Sine(440, 1.0, 16000, 0.8);
  for (double& v : x.samples) v = static_cast<float>(v);
  WriteWav(dir / "a.wav", x, WavEncoding::kFloat32);
  const AudioBuffer y = ReadWav(dir / "a.wav");
  EXPECT_EQ(y.sample_rate, 16000);
  EXPECT_EQ(y.samples, x.samples);
}

TEST(Wav, Pcm16RoundTripWithinOneStep) {
  const auto dir = testing::ScratchDir("wav_pcm");
  AudioBuffer x = WhiteNoise(0.5, 16000, 0.4, 9);
  for (double& v : x.samples) v = std::clamp(v, -1.0, 1.0);
  x.samples[0] = 1.0;
  x.samples[1] = -1.0;
  WriteWav(dir / "a.wav", x, WavEncoding::kPcm16);
  const AudioBuffer y = ReadWav(dir / "a.wav");
  ASSERT_EQ(y.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LE(std::abs(y.samples[i] - x.samples[i]), 1.0 / 32768);
}

TEST(Wav, StereoIsAveraged) {
  const auto dir = testing::ScratchDir("wav_stereo");
  // Hand-built 2-channel float file: frames (0.5, -0.25), (1.0, 0.0).
  std::vector<char> bytes;
  auto put32 = [&](std::uint32_t v) { bytes.insert(bytes.end(), reinterpret_cast<char*>(&v), reinterpret_cast<char*>(&v) + 4); };
  auto put16 = [&](std::uint16_t v) { bytes.insert(bytes.end(), reinterpret_cast<char*>(&v), reinterpret_cast<char*>(&v) + 2); };
  auto putf = [&](float v) { bytes.insert(bytes.end(), reinterpret_cast<char*>(&v), reinterpret_cast<char*>(&v) + 4); };
  bytes.insert(bytes.end(), {'R', 'I', 'F', 'F'});
  put32(36 + 16);
  bytes.insert(bytes.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(16); put16(3); put16(2); put32(48000); put32(48000 * 8); put16(8); put16(32);
  bytes.insert(bytes.end(), {'d', 'a', 't', 'a'});
  put32(16); putf(0.5f); putf(-0.25f); putf(1.0f); putf(0.0f);
  std::ofstream(dir / "st.wav", std::ios::binary).write(bytes.data(), static_cast<long>(bytes.size()));
  const AudioBuffer y = ReadWav(dir / "st.wav");
  EXPECT_EQ(y.sample_rate, 48000);
  EXPECT_EQ(y.samples, (std::vector<double>{0.125, 0.5}));
}

TEST(Wav, RejectsTruncatedAndUnsupported) {
  const auto dir = testing::ScratchDir("wav_bad");
  std::ofstream(dir / "t.wav", std::ios::binary) << "RIFF\x10\x00";
  try {
    ReadWav(dir / "t.wav");
    FAIL() << "expected malformed WAV";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("malformed WAV"), std::string::npos);
  }
  // 24-bit PCM is outside the supported set.
  AudioBuffer x({0.1, 0.2}, 8000);
  WriteWav(dir / "ok.wav", x, WavEncoding::kPcm16);
  std::fstream f(dir / "ok.wav", std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(34);
  const std::uint16_t bits = 24;
  f.write(reinterpret_cast<const char*>(&bits), 2);
  f.close();
  try {
    ReadWav(dir / "ok.wav");
    FAIL() << "expected unsupported codec";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported codec"), std::string::npos);
  }
  EXPECT_THROW(ReadWav(dir / "missing.wav"), Error);
}

}  // namespace
}  // namespace cisimkit::dsp
