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

#include "cisimkit/dsp/butterworth.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cisimkit/error.h"

namespace cisimkit::dsp {
namespace {

using Complex = std::complex<double>;

// Bilinear map s -> z with sampling rate fs.
Complex Bilinear(Complex s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

double Prewarp(double f_hz, double fs) { return 2.0 * fs * std::tan(std::numbers::pi * f_hz / fs); }

// Left-half-plane poles of the unit-cutoff analog prototype.
std::vector<Complex> PrototypePoles(int order) {
  std::vector<Complex> poles;
  for (int k = 0; k < order; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order);
    poles.push_back(std::polar(1.0, theta));
  }
  return poles;
}

// Groups digital poles into conjugate pairs (or pairs of reals); a lone real
// pole becomes a first-order section.
struct PoleGroup {
  Complex p1;
  Complex p2;
  bool second_order;
};

std::vector<PoleGroup> PairPoles(const std::vector<Complex>& poles) {
  constexpr double kImagTol = 1e-12;
  std::vector<Complex> upper;
  std::vector<double> reals;
  for (const Complex& p : poles) {
    if (std::abs(p.imag()) <= kImagTol * std::max(1.0, std::abs(p))) {
      reals.push_back(p.real());
    } else if (p.imag() > 0) {
      upper.push_back(p);
    }
  }
  std::vector<PoleGroup> groups;
  for (const Complex& p : upper) groups.push_back({p, std::conj(p), true});
  std::sort(reals.begin(), reals.end());
  std::size_t i = 0;
  for (; i + 1 < reals.size(); i += 2) groups.push_back({reals[i], reals[i + 1], true});
  if (i < reals.size()) groups.push_back({reals[i], 0.0, false});
  return groups;
}

}  // namespace

Complex Biquad::Response(double omega) const {
  const Complex z1 = std::polar(1.0, -omega);
  const Complex z2 = z1 * z1;
  return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
}

Complex BiquadCascade::Response(double freq_hz) const {
  const double omega = 2.0 * std::numbers::pi * freq_hz / fs_hz;
  Complex h = 1.0;
  for (const Biquad& s : sections) h *= s.Response(omega);
  return h;
}

double BiquadCascade::MagnitudeDb(double freq_hz) const {
  return 20.0 * std::log10(std::abs(Response(freq_hz)));
}

std::vector<double> BiquadCascade::PoleMagnitudes() const {
  std::vector<double> mags;
  for (const Biquad& s : sections) {
    if (s.a2 == 0.0) {
      mags.push_back(std::abs(s.a1));
      continue;
    }
    // Roots of z^2 + a1 z + a2.
    const Complex disc = std::sqrt(Complex(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    mags.push_back(std::abs((-s.a1 + disc) / 2.0));
    mags.push_back(std::abs((-s.a1 - disc) / 2.0));
  }
  return mags;
}

BiquadCascade DesignButterworth(int order, FilterKind kind, std::span<const double> cutoffs_hz,
                                double fs_hz) {
  Require(order >= 1 && order <= 6, "Butterworth order must be in 1..6");
  Require(fs_hz > 0.0, "sampling rate must be positive");
  const std::size_t expected = kind == FilterKind::kLowpass ? 1 : 2;
  Require(cutoffs_hz.size() == expected,
          kind == FilterKind::kLowpass ? "lowpass takes one cutoff" : "bandpass takes two edges");
  for (double f : cutoffs_hz) {
    Require(f > 0.0 && f < fs_hz / 2.0, "cutoff must lie strictly inside (0, fs/2)");
  }
  if (kind == FilterKind::kBandpass) {
    Require(cutoffs_hz[0] < cutoffs_hz[1], "band edges must be ascending");
  }

  BiquadCascade cascade;
  cascade.order = order;
  cascade.kind = kind;
  cascade.cutoffs_hz.assign(cutoffs_hz.begin(), cutoffs_hz.end());
  cascade.fs_hz = fs_hz;

  std::vector<Complex> digital_poles;
  double omega_ref = 0.0;  // frequency where the gain is normalized to one
  if (kind == FilterKind::kLowpass) {
    const double wc = Prewarp(cutoffs_hz[0], fs_hz);
    for (const Complex& p : PrototypePoles(order)) digital_poles.push_back(Bilinear(wc * p, fs_hz));
  } else {
    const double w1 = Prewarp(cutoffs_hz[0], fs_hz);
    const double w2 = Prewarp(cutoffs_hz[1], fs_hz);
    const double bw = w2 - w1;
    const double w0_sq = w1 * w2;
    for (const Complex& p : PrototypePoles(order)) {
      // Lowpass-to-bandpass: s^2 - p*bw*s + w0^2 = 0.
      const Complex half = p * bw / 2.0;
      const Complex root = std::sqrt(half * half - w0_sq);
      digital_poles.push_back(Bilinear(half + root, fs_hz));
      digital_poles.push_back(Bilinear(half - root, fs_hz));
    }
    omega_ref = 2.0 * std::atan(std::sqrt(w0_sq) / (2.0 * fs_hz));
  }

  for (const PoleGroup& g : PairPoles(digital_poles)) {
    Biquad s;
    if (g.second_order) {
      s.a1 = -(g.p1 + g.p2).real();
      s.a2 = (g.p1 * g.p2).real();
      if (kind == FilterKind::kLowpass) {
        s.b0 = 1.0, s.b1 = 2.0, s.b2 = 1.0;  // double zero at z = -1
      } else {
        s.b0 = 1.0, s.b1 = 0.0, s.b2 = -1.0;  // zeros at z = +1 and z = -1
      }
    } else {
      s.a1 = -g.p1.real();
      s.b0 = 1.0, s.b1 = 1.0;  // zero at z = -1
    }
    const double gain = std::abs(s.Response(omega_ref));
    s.b0 /= gain, s.b1 /= gain, s.b2 /= gain;
    cascade.sections.push_back(s);
  }
  return cascade;
}

void FilterInPlace(std::span<double> x, const BiquadCascade& filter) {
  for (const Biquad& s : filter.sections) {
    double z1 = 0.0, z2 = 0.0;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

AudioBuffer ApplyFilter(const AudioBuffer& x, const BiquadCascade& filter) {
  Require(std::abs(static_cast<double>(x.sample_rate) - filter.fs_hz) < 1e-9,
          "sample-rate mismatch: signal at " + std::to_string(x.sample_rate) +
              " Hz, filter designed for " + std::to_string(filter.fs_hz) + " Hz");
  AudioBuffer y = x;
  FilterInPlace(y.samples, filter);
  return y;
}

}  // namespace cisimkit::dsp
