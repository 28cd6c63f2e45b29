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

#include "cisimkit/dsp/spectrogram.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include "cisimkit/dsp/fft.h"
#include "cisimkit/error.h"

namespace cisimkit::dsp {

std::vector<double> MakeWindow(Window kind, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (kind == Window::kHann && n > 1) {
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
    }
  }
  return w;
}

std::size_t SpectrogramMatrix::ArgmaxBin(std::size_t frame) const {
  const auto row = magnitudes.begin() + static_cast<std::ptrdiff_t>(frame * bins);
  return static_cast<std::size_t>(std::max_element(row, row + static_cast<std::ptrdiff_t>(bins)) - row);
}

SpectrogramMatrix Spectrogram(const AudioBuffer& x, std::size_t frame_len, std::size_t hop,
                              Window window) {
  Require(hop >= 1 && frame_len >= hop, "spectrogram needs frame_len >= hop >= 1");
  Require(x.size() >= frame_len, "signal shorter than one frame");

  SpectrogramMatrix s;
  s.frame_len = frame_len;
  s.hop = hop;
  s.fs = x.sample_rate;
  s.frames = (x.size() - frame_len) / hop + 1;
  s.bins = frame_len / 2 + 1;
  s.magnitudes.assign(s.frames * s.bins, 0.0);

  const std::vector<double> w = MakeWindow(window, frame_len);
  Fft fft(frame_len);
  std::vector<double> frame(frame_len);
  std::vector<std::complex<double>> spectrum(fft.num_bins());
  for (std::size_t f = 0; f < s.frames; ++f) {
    for (std::size_t i = 0; i < frame_len; ++i) frame[i] = w[i] * x.samples[f * hop + i];
    fft.Forward(frame, spectrum);
    for (std::size_t k = 0; k < s.bins; ++k) s.at(f, k) = std::abs(spectrum[k]);
  }
  return s;
}

SpectrogramMatrix ToDecibels(const SpectrogramMatrix& linear, double floor_db) {
  SpectrogramMatrix db = linear;
  db.in_db = true;
  const double peak = linear.magnitudes.empty()
                          ? 0.0
                          : *std::max_element(linear.magnitudes.begin(), linear.magnitudes.end());
  for (double& v : db.magnitudes) {
    v = (peak > 0.0 && v > 0.0) ? std::max(floor_db, 20.0 * std::log10(v / peak)) : floor_db;
  }
  return db;
}

void WriteSpectrogramCsv(const std::filesystem::path& path, const SpectrogramMatrix& s) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "time_s";
  for (std::size_t k = 0; k < s.bins; ++k) out << ",bin_" << k;
  out << '\n';
  out.precision(9);
  for (std::size_t f = 0; f < s.frames; ++f) {
    out << s.frame_time_s(f);
    for (std::size_t k = 0; k < s.bins; ++k) out << ',' << s.at(f, k);
    out << '\n';
  }
}

void WriteSpectrogramPgm(const std::filesystem::path& path, const SpectrogramMatrix& db,
                         double floor_db) {
  Require(db.in_db, "PGM export expects a dB spectrogram");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P5\n" << db.frames << ' ' << db.bins << "\n255\n";
  std::vector<unsigned char> row(db.frames);
  for (std::size_t r = 0; r < db.bins; ++r) {
    const std::size_t k = db.bins - 1 - r;
    for (std::size_t f = 0; f < db.frames; ++f) {
      const double t = std::clamp((db.at(f, k) - floor_db) / -floor_db, 0.0, 1.0);
      row[f] = static_cast<unsigned char>(std::lround(255.0 * t));
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
}

}  // namespace cisimkit::dsp
