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

#include "cisimkit/corpus/synthetic.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "cisimkit/dsp/butterworth.h"
#include "cisimkit/error.h"

namespace cisimkit::corpus {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Vowel {
  double f1, f2, f3;
};

constexpr std::array<Vowel, 6> kVowels{{
    {730, 1090, 2440},  // a
    {270, 2290, 3010},  // i
    {300, 870, 2240},   // u
    {530, 1840, 2480},  // e
    {570, 840, 2410},   // o
    {440, 1020, 2240},  // schwa-like
}};

// Magnitude of a second-order resonance at f with centre fc and bandwidth bw.
double Resonance(double f, double fc, double bw) {
  const double x = (f * f - fc * fc);
  return (fc * bw) / std::sqrt(x * x + f * f * bw * bw);
}

void NormalizeRms(std::vector<double>& x, double target) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  const double rms = std::sqrt(acc / static_cast<double>(x.size()));
  if (rms > 0.0) {
    for (double& v : x) v *= target / rms;
  }
}

std::vector<double> Filtered(std::vector<double> x, int order, dsp::FilterKind kind,
                             std::vector<double> cutoffs, int fs) {
  dsp::FilterInPlace(x, dsp::DesignButterworth(order, kind, cutoffs, fs));
  return x;
}

}  // namespace

dsp::AudioBuffer SyntheticUtterance(std::uint64_t seed, double seconds, int fs, double rms) {
  Require(seconds > 0.0 && fs > 0, "synthetic utterance needs positive duration and rate");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto n = static_cast<std::size_t>(std::llround(seconds * fs));
  std::vector<double> y(n, 0.0);

  const double speaker_f0 = 110.0 + 110.0 * unit(rng);
  const double nyquist = fs / 2.0;
  std::size_t pos = static_cast<std::size_t>((0.05 + 0.1 * unit(rng)) * fs);
  while (pos < n) {
    const auto len = static_cast<std::size_t>((0.16 + 0.14 * unit(rng)) * fs);
    const std::size_t end = std::min(n, pos + len);
    const Vowel& v = kVowels[static_cast<std::size_t>(unit(rng) * kVowels.size()) % kVowels.size()];
    const int tone = static_cast<int>(unit(rng) * 4.0) % 4;
    const double gain = 0.5 + unit(rng);
    double phase = 0.0;
    for (std::size_t i = pos; i < end; ++i) {
      const double t = static_cast<double>(i - pos) / static_cast<double>(end - pos);
      double contour = 1.0;
      switch (tone) {
        case 0: contour = 1.1; break;
        case 1: contour = 0.85 + 0.35 * t; break;
        case 2: contour = 0.95 - 0.5 * t * (1.0 - t) * 1.6; break;
        case 3: contour = 1.25 - 0.45 * t; break;
      }
      const double f0 = speaker_f0 * contour;
      phase += kTwoPi * f0 / fs;
      double s = 0.0;
      for (int h = 1; h * f0 < nyquist * 0.95; ++h) {
        const double f = h * f0;
        const double a = Resonance(f, v.f1, 80.0) + 0.7 * Resonance(f, v.f2, 110.0) +
                         0.4 * Resonance(f, v.f3, 160.0);
        s += a / std::sqrt(static_cast<double>(h)) * std::sin(h * phase);
      }
      const double ramp = std::min({1.0, t / 0.15, (1.0 - t) / 0.25});
      y[i] += gain * ramp * s;
    }
    // Fricative onset on about a third of the syllables.
    if (unit(rng) < 0.35) {
      const auto flen = static_cast<std::size_t>(0.06 * fs);
      const std::size_t fstart = pos >= flen ? pos - flen / 2 : 0;
      std::vector<double> burst(std::min(flen, n - fstart));
      std::normal_distribution<double> g(0.0, 1.0);
      for (double& b : burst) b = g(rng);
      if (burst.size() > 16) {
        burst = Filtered(std::move(burst), 2, dsp::FilterKind::kBandpass,
                         {std::min(3000.0, nyquist * 0.5), nyquist * 0.85}, fs);
      }
      for (std::size_t i = 0; i < burst.size(); ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(burst.size());
        y[fstart + i] += 0.6 * gain * std::sin(std::numbers::pi * t) * burst[i];
      }
    }
    pos = end + static_cast<std::size_t>((0.03 + 0.09 * unit(rng)) * fs);
  }
  NormalizeRms(y, rms);
  return {std::move(y), fs};
}

dsp::AudioBuffer EngineNoise(std::uint64_t seed, double seconds, int fs) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto n = static_cast<std::size_t>(std::llround(seconds * fs));
  std::vector<double> rumble(n);
  for (double& v : rumble) v = g(rng);
  rumble = Filtered(std::move(rumble), 2, dsp::FilterKind::kLowpass, {900.0}, fs);
  std::vector<double> hiss(n);
  for (double& v : hiss) v = g(rng);
  hiss = Filtered(std::move(hiss), 2, dsp::FilterKind::kBandpass, {1000.0, std::min(5000.0, fs * 0.45)}, fs);

  const double firing = 28.0 + 12.0 * unit(rng);
  std::vector<double> phases(40);
  for (double& p : phases) p = kTwoPi * unit(rng);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t h = 1; h <= phases.size(); ++h) {
      const double f = firing * static_cast<double>(h);
      if (f > fs * 0.45) break;
      s += std::sin(kTwoPi * f * static_cast<double>(i) / fs + phases[h - 1]) / std::pow(static_cast<double>(h), 0.7);
    }
    y[i] = 0.6 * s + 3.0 * rumble[i] + 0.25 * hiss[i];
  }
  NormalizeRms(y, 0.05);
  return {std::move(y), fs};
}

dsp::AudioBuffer StreetNoise(std::uint64_t seed, double seconds, int fs) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  const auto n = static_cast<std::size_t>(std::llround(seconds * fs));

  std::vector<double> low(n), mid(n);
  for (double& v : low) v = g(rng);
  for (double& v : mid) v = g(rng);
  low = Filtered(std::move(low), 2, dsp::FilterKind::kLowpass, {400.0}, fs);
  mid = Filtered(std::move(mid), 2, dsp::FilterKind::kBandpass, {500.0, std::min(4000.0, fs * 0.45)}, fs);

  // Slow random level trajectories, one per component.
  const auto step = static_cast<std::size_t>(0.05 * fs);
  std::vector<double> level_low(n), level_mid(n);
  double a = 1.0, b = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % step == 0) {
      a = std::clamp(a * std::exp(0.35 * g(rng)), 0.15, 3.0);
      b = std::clamp(b * std::exp(0.45 * g(rng)), 0.1, 3.0);
    }
    level_low[i] = 0.995 * (i ? level_low[i - 1] : a) + 0.005 * a;
    level_mid[i] = 0.995 * (i ? level_mid[i - 1] : b) + 0.005 * b;
  }

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = level_low[i] * low[i] * 2.0 + level_mid[i] * mid[i];

  // Events: horns (harmonic bursts) and pass-bys (swelling band noise).
  const double events = seconds * 1.2;
  for (int e = 0; e < static_cast<int>(events); ++e) {
    const auto start = static_cast<std::size_t>(unit(rng) * static_cast<double>(n));
    if (unit(rng) < 0.5) {
      const double f0 = 330.0 + 200.0 * unit(rng);
      const auto len = static_cast<std::size_t>((0.2 + 0.4 * unit(rng)) * fs);
      for (std::size_t i = 0; i < len && start + i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        double s = 0.0;
        for (int h = 1; h <= 6 && h * f0 < fs * 0.45; ++h) s += std::sin(kTwoPi * h * f0 * t) / h;
        const double env = std::min(1.0, std::min(t / 0.02, (static_cast<double>(len - i) / fs) / 0.05));
        y[start + i] += 1.5 * env * s;
      }
    } else {
      const auto len = static_cast<std::size_t>((0.8 + 1.2 * unit(rng)) * fs);
      std::vector<double> swoosh(std::min(len, n - start));
      if (swoosh.size() < 32) continue;
      for (double& v : swoosh) v = g(rng);
      swoosh = Filtered(std::move(swoosh), 2, dsp::FilterKind::kBandpass, {200.0, std::min(2500.0, fs * 0.45)}, fs);
      for (std::size_t i = 0; i < swoosh.size(); ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(swoosh.size());
        y[start + i] += 3.0 * std::pow(std::sin(std::numbers::pi * t), 2.0) * swoosh[i];
      }
    }
  }
  NormalizeRms(y, 0.05);
  return {std::move(y), fs};
}

}  // namespace cisimkit::corpus
