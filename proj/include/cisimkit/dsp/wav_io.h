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

#ifndef CISIMKIT_DSP_WAV_IO_H_
#define CISIMKIT_DSP_WAV_IO_H_

#include <filesystem>

#include "cisimkit/dsp/audio.h"

namespace cisimkit::dsp {

enum class WavEncoding { kPcm16, kFloat32 };

// Reads a RIFF/WAVE file holding PCM-16 or IEEE float-32 samples in one or
// two channels. Stereo is folded to mono by averaging the channels.
// Throws Error("malformed WAV: ...") or Error("unsupported codec: ...").
AudioBuffer ReadWav(const std::filesystem::path& path);

// Writes a mono WAV. PCM-16 clips to [-1, 1) and rounds to the nearest
// step of 2^-15; float-32 stores each sample rounded to single precision.
void WriteWav(const std::filesystem::path& path, const AudioBuffer& x,
              WavEncoding encoding = WavEncoding::kFloat32);

}  // namespace cisimkit::dsp

#endif  // CISIMKIT_DSP_WAV_IO_H_
