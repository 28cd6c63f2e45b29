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

#include "cisimkit/metrics/stoi.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cisimkit/error.h"

namespace cisimkit::metrics {
namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Hann window of length n without its zero end points (MATLAB hanning(n)).
std::vector<double> InteriorHann(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * (i + 1) / (n + 1));
  return w;
}

double Norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

void StoiConfig::Validate() const {
  Require(internal_fs > 0 && frame_len > 0 && hop > 0, "STOI rates and frame sizes must be positive");
  Require(fft_size >= frame_len, "STOI FFT size must be at least the frame length");
  Require(num_bands >= 1 && min_freq_hz > 0.0, "STOI needs at least one band above 0 Hz");
  Require(segment_frames >= 2, "STOI segment must span at least 2 frames");
  Require(min_freq_hz * std::pow(2.0, (2.0 * (num_bands - 1) + 1.0) / 6.0) <= internal_fs / 2.0,
          "STOI bands must lie below the internal Nyquist frequency");
}

std::vector<std::pair<std::size_t, std::size_t>> ThirdOctaveBands(const StoiConfig& cfg) {
  const std::size_t num_bins = static_cast<std::size_t>(cfg.fft_size / 2 + 1);
  const double bin_hz = static_cast<double>(cfg.internal_fs) / cfg.fft_size;
  // Nearest bin, ties to the lower index.
  auto nearest = [&](double hz) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < num_bins; ++k) {
      const double d = (k * bin_hz - hz) * (k * bin_hz - hz);
      if (d < best_d) best_d = d, best = k;
    }
    return best;
  };
  std::vector<std::pair<std::size_t, std::size_t>> bands;
  for (int k = 0; k < cfg.num_bands; ++k) {
    const double lo = cfg.min_freq_hz * std::pow(2.0, (2.0 * k - 1.0) / 6.0);
    const double hi = cfg.min_freq_hz * std::pow(2.0, (2.0 * k + 1.0) / 6.0);
    bands.emplace_back(nearest(lo), nearest(hi));
  }
  return bands;
}

StoiEvaluator::StoiEvaluator(StoiConfig cfg, int fs)
    : cfg_((cfg.Validate(), cfg)),
      fs_(fs),
      window_(InteriorHann(cfg_.frame_len)),
      bands_(ThirdOctaveBands(cfg_)),
      fft_(static_cast<std::size_t>(cfg_.fft_size)) {
  Require(fs > 0, "sample rate must be positive");
  if (fs_ != cfg_.internal_fs) {
    resampler_ = std::make_unique<dsp::Resampler>(fs_, cfg_.internal_fs, dsp::Resampler::Design::kOctave);
  }
}

std::vector<double> StoiEvaluator::ToInternalRate(std::span<const double> x) const {
  if (!resampler_) return {x.begin(), x.end()};
  return resampler_->Apply(x);
}

std::size_t StoiEvaluator::CountFrames(std::size_t length) const {
  const auto frame = static_cast<std::size_t>(cfg_.frame_len);
  const auto hop = static_cast<std::size_t>(cfg_.hop);
  // Frame starts 0, hop, ... strictly below length - frame.
  return length > frame ? (length - frame + hop - 1) / hop : 0;
}

StoiEvaluator::Spectra StoiEvaluator::Analyze(std::span<const double> x10) {
  Spectra s;
  s.num_frames = CountFrames(x10.size());
  const std::size_t nb = fft_.num_bins();
  const auto frame = static_cast<std::size_t>(cfg_.frame_len);
  s.bins.resize(s.num_frames * nb);
  s.bands.assign(bands_.size() * s.num_frames, 0.0);
  std::vector<double> buf(frame);
  for (std::size_t m = 0; m < s.num_frames; ++m) {
    const std::size_t start = m * static_cast<std::size_t>(cfg_.hop);
    for (std::size_t n = 0; n < frame; ++n) buf[n] = window_[n] * x10[start + n];
    std::span<std::complex<double>> spec(s.bins.data() + m * nb, nb);
    fft_.Forward(buf, spec);
    for (std::size_t j = 0; j < bands_.size(); ++j) {
      double e = 0.0;
      for (std::size_t k = bands_[j].first; k < bands_[j].second; ++k) e += std::norm(spec[k]);
      s.bands[j * s.num_frames + m] = std::sqrt(e);
    }
  }
  return s;
}

double StoiEvaluator::Correlate(const std::vector<double>& xb, const std::vector<double>& yb, std::size_t num_frames,
                                std::vector<double>* grad_yb, std::vector<char>* clipped) const {
  const auto seg = static_cast<std::size_t>(cfg_.segment_frames);
  Require(num_frames >= seg, "signal too short: " + std::to_string(num_frames) + " frames, STOI needs " +
                                 std::to_string(seg));
  const std::size_t num_segments = num_frames - seg + 1;
  const double clip = 1.0 + std::pow(10.0, -cfg_.beta_db / 20.0);
  const double weight = 1.0 / static_cast<double>(bands_.size() * num_segments);
  if (grad_yb) grad_yb->assign(yb.size(), 0.0);

  std::vector<double> yp(seg), xc(seg), gyc(seg);
  std::vector<bool> pass(seg);
  double total = 0.0;
  for (std::size_t j = 0; j < bands_.size(); ++j) {
    for (std::size_t s = 0; s < num_segments; ++s) {
      const double* xv = xb.data() + j * num_frames + s;
      const double* yv = yb.data() + j * num_frames + s;
      const double nx = Norm({xv, seg});
      const double ny = Norm({yv, seg});
      const double a = nx / (ny + kEps);
      double yp_mean = 0.0, x_mean = 0.0;
      for (std::size_t i = 0; i < seg; ++i) {
        const double yn = a * yv[i];
        const double bound = xv[i] * clip;
        pass[i] = yn <= bound;
        if (clipped) clipped->push_back(pass[i] ? 0 : 1);
        yp[i] = pass[i] ? yn : bound;
        yp_mean += yp[i];
        x_mean += xv[i];
      }
      yp_mean /= static_cast<double>(seg);
      x_mean /= static_cast<double>(seg);
      double nyc2 = 0.0, nxc2 = 0.0;
      for (std::size_t i = 0; i < seg; ++i) {
        yp[i] -= yp_mean;
        xc[i] = xv[i] - x_mean;
        nyc2 += yp[i] * yp[i];
        nxc2 += xc[i] * xc[i];
      }
      const double dy = std::sqrt(nyc2) + kEps;
      const double dx = std::sqrt(nxc2) + kEps;
      double dot = 0.0;
      for (std::size_t i = 0; i < seg; ++i) dot += yp[i] * xc[i] / dx;
      total += dot / dy;
      if (!grad_yb) continue;

      // rho = <yc, u> / (|yc| + eps) with u = xc / (|xc| + eps).
      const double nyc = std::sqrt(nyc2);
      double g_mean = 0.0;
      for (std::size_t i = 0; i < seg; ++i) {
        double g = xc[i] / dx / dy;
        if (nyc > 0.0) g -= dot * yp[i] / (dy * dy * nyc);
        gyc[i] = weight * g;
        g_mean += gyc[i];
      }
      g_mean /= static_cast<double>(seg);
      double y_dot_g = 0.0;
      for (std::size_t i = 0; i < seg; ++i) {
        gyc[i] = pass[i] ? gyc[i] - g_mean : 0.0;  // through centring, then the clip
        y_dot_g += yv[i] * gyc[i];
      }
      double* gy = grad_yb->data() + j * num_frames + s;
      for (std::size_t i = 0; i < seg; ++i) {
        double g = a * gyc[i];
        if (ny > 0.0) g -= nx * y_dot_g * yv[i] / ((ny + kEps) * (ny + kEps) * ny);
        gy[i] += g;
      }
    }
  }
  return total * weight;
}

double StoiEvaluator::Evaluate(std::span<const double> clean, std::span<const double> processed) {
  Require(clean.size() == processed.size(), "length mismatch: clean has " + std::to_string(clean.size()) +
                                                " samples, processed has " + std::to_string(processed.size()));
  Require(Norm(clean) > 0.0, "clean signal is silent");
  std::vector<double> x = ToInternalRate(clean);
  std::vector<double> y = ToInternalRate(processed);
  Require(CountFrames(x.size()) >= static_cast<std::size_t>(cfg_.segment_frames), "signal too short");

  if (cfg_.remove_silent) {
    const auto frame = static_cast<std::size_t>(cfg_.frame_len);
    const auto hop = static_cast<std::size_t>(cfg_.hop);
    const std::size_t nf = CountFrames(x.size());
    std::vector<double> energy(nf);
    for (std::size_t m = 0; m < nf; ++m) {
      double e = 0.0;
      for (std::size_t n = 0; n < frame; ++n) {
        const double v = window_[n] * x[m * hop + n];
        e += v * v;
      }
      energy[m] = 20.0 * std::log10(std::sqrt(e) + kEps);
    }
    const double peak = *std::max_element(energy.begin(), energy.end());
    std::vector<std::size_t> keep;
    for (std::size_t m = 0; m < nf; ++m) {
      if (peak - cfg_.dyn_range_db - energy[m] < 0.0) keep.push_back(m);
    }
    Require(!keep.empty(), "all frames silent");
    // Overlap-add the retained windowed frames back into contiguous signals.
    const std::size_t out_len = (keep.size() - 1) * hop + frame;
    std::vector<double> xs(out_len, 0.0), ys(out_len, 0.0);
    for (std::size_t r = 0; r < keep.size(); ++r) {
      const std::size_t src = keep[r] * hop, dst = r * hop;
      for (std::size_t n = 0; n < frame; ++n) {
        xs[dst + n] += window_[n] * x[src + n];
        ys[dst + n] += window_[n] * y[src + n];
      }
    }
    x = std::move(xs);
    y = std::move(ys);
    Require(CountFrames(x.size()) >= static_cast<std::size_t>(cfg_.segment_frames),
            "signal too short after silent-frame removal");
  }

  const Spectra sx = Analyze(x);
  const Spectra sy = Analyze(y);
  return Correlate(sx.bands, sy.bands, sx.num_frames, nullptr);
}

std::vector<char> StoiEvaluator::ClipPattern(const Reference& ref, std::span<const double> processed) {
  Require(processed.size() == ref.input_length, "length mismatch between clean reference and processed signal");
  const Spectra sy = Analyze(ToInternalRate(processed));
  std::vector<char> clipped;
  Correlate(ref.bands, sy.bands, ref.num_frames, nullptr, &clipped);
  return clipped;
}

StoiEvaluator::Reference StoiEvaluator::Prepare(std::span<const double> clean) {
  Reference ref;
  ref.input_length = clean.size();
  const std::vector<double> x = ToInternalRate(clean);
  ref.num_frames = CountFrames(x.size());
  Require(ref.num_frames >= static_cast<std::size_t>(cfg_.segment_frames), "signal too short");
  Spectra s = Analyze(x);
  ref.bands = std::move(s.bands);
  return ref;
}

double StoiEvaluator::ValueAndGradient(const Reference& ref, std::span<const double> processed,
                                       std::vector<double>* grad) {
  Require(processed.size() == ref.input_length, "length mismatch between clean reference and processed signal");
  const std::vector<double> y = ToInternalRate(processed);
  const Spectra sy = Analyze(y);
  std::vector<double> grad_bands;
  const double value = Correlate(ref.bands, sy.bands, ref.num_frames, grad ? &grad_bands : nullptr);
  if (!grad) return value;

  // Band energies B = sqrt(sum |Y_k|^2) back to frame samples:
  // dB/dY_k = Y_k / B, and a real frame f maps to Y_k = sum_n f_n e^{-i 2pi kn/N},
  // so dL/df_n = Re(sum_k G_k e^{+i 2pi kn/N}) with G_k = (dL/dB) Y_k / B.
  const std::size_t nb = fft_.num_bins();
  const auto nfft = static_cast<std::size_t>(cfg_.fft_size);
  const auto frame = static_cast<std::size_t>(cfg_.frame_len);
  std::vector<std::complex<double>> spectrum(nfft);
  std::vector<double> frame_grad(nfft);
  std::vector<double> g10(y.size(), 0.0);
  for (std::size_t m = 0; m < sy.num_frames; ++m) {
    std::fill(spectrum.begin(), spectrum.end(), std::complex<double>(0.0, 0.0));
    bool any = false;
    for (std::size_t j = 0; j < bands_.size(); ++j) {
      const double b = sy.bands[j * sy.num_frames + m];
      const double g = grad_bands[j * sy.num_frames + m];
      if (b <= 0.0 || g == 0.0) continue;
      any = true;
      for (std::size_t k = bands_[j].first; k < bands_[j].second; ++k) spectrum[k] = (g / b) * sy.bins[m * nb + k];
    }
    if (!any) continue;
    fft_.InverseReal(spectrum, frame_grad);
    const std::size_t start = m * static_cast<std::size_t>(cfg_.hop);
    for (std::size_t n = 0; n < frame; ++n) g10[start + n] += window_[n] * frame_grad[n];
  }
  *grad = resampler_ ? resampler_->ApplyTranspose(g10, processed.size()) : std::move(g10);
  return value;
}

double Stoi(const dsp::AudioBuffer& clean, const dsp::AudioBuffer& processed, const StoiConfig& cfg) {
  Require(clean.sample_rate == processed.sample_rate, "sample-rate mismatch between clean and processed");
  StoiEvaluator ev(cfg, clean.sample_rate);
  return ev.Evaluate(clean.samples, processed.samples);
}

}  // namespace cisimkit::metrics
