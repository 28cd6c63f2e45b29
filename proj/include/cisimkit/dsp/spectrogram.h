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

#ifndef CISIMKIT_DSP_SPECTROGRAM_H_
#define CISIMKIT_DSP_SPECTROGRAM_H_

#include <cstddef>
#include <filesystem>
#include <vector>

#include "cisimkit/dsp/audio.h"

namespace cisimkit::dsp {

enum class Window { kHann, kRectangular };

// Symmetric window of length n.
std::vector<double> MakeWindow(Window kind, std::size_t n);

// frames x bins magnitudes, row-major.
struct SpectrogramMatrix {
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t frame_len = 0;
  std::size_t hop = 0;
  int fs = 0;
  bool in_db = false;
  std::vector<double> magnitudes;

  double at(std::size_t frame, std::size_t bin) const { return magnitudes[frame * bins + bin]; }
  double& at(std::size_t frame, std::size_t bin) { return magnitudes[frame * bins + bin]; }
  double bin_hz(std::size_t bin) const { return static_cast<double>(bin) * fs / frame_len; }
  double frame_time_s(std::size_t frame) const { return static_cast<double>(frame * hop) / fs; }
  // Index of the strongest bin in `frame`.
  std::size_t ArgmaxBin(std::size_t frame) const;
};

// Magnitude STFT with frames = floor((N - frame_len)/hop) + 1 and
// frame_len/2 + 1 bins. Requires frame_len >= hop >= 1 and N >= frame_len.
SpectrogramMatrix Spectrogram(const AudioBuffer& x, std::size_t frame_len, std::size_t hop,
                              Window window = Window::kHann);

// 20*log10(magnitude) relative to the matrix peak, floored at `floor_db`.
SpectrogramMatrix ToDecibels(const SpectrogramMatrix& linear, double floor_db = -80.0);

// CSV with header "time_s,bin_0,...,bin_K", one row per frame.
void WriteSpectrogramCsv(const std::filesystem::path& path, const SpectrogramMatrix& s);

// Binary PGM (P5): one row per bin (high frequencies on top), one column per
// frame. Expects a dB matrix and maps [floor, 0] dB onto [0, 255].
void WriteSpectrogramPgm(const std::filesystem::path& path, const SpectrogramMatrix& db,
                         double floor_db = -80.0);

}  // namespace cisimkit::dsp

#endif  // CISIMKIT_DSP_SPECTROGRAM_H_
