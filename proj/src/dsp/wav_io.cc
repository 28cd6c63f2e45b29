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

#include "cisimkit/dsp/wav_io.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "cisimkit/error.h"

namespace cisimkit::dsp {
namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T Load(const std::vector<char>& bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

template <typename T>
void Store(std::vector<char>& bytes, T value) {
  const char* p = reinterpret_cast<const char*>(&value);
  bytes.insert(bytes.end(), p, p + sizeof(T));
}

[[noreturn]] void Malformed(const std::string& why) { throw Error("malformed WAV: " + why); }

}  // namespace

AudioBuffer ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    Malformed("missing RIFF/WAVE header");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  std::size_t data_offset = 0, data_size = 0;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id(bytes.data() + pos, 4);
    const std::uint32_t size = Load<std::uint32_t>(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + size > bytes.size()) Malformed("truncated fmt chunk");
      format = Load<std::uint16_t>(bytes, body);
      channels = Load<std::uint16_t>(bytes, body + 2);
      sample_rate = Load<std::uint32_t>(bytes, body + 4);
      bits = Load<std::uint16_t>(bytes, body + 14);
      if (format == kFormatExtensible) {
        if (size < 40) Malformed("truncated extensible fmt chunk");
        format = Load<std::uint16_t>(bytes, body + 24);
      }
      have_fmt = true;
    } else if (id == "data") {
      data_offset = body;
      // Some writers leave the size field unset for streamed output.
      data_size = std::min<std::size_t>(size, bytes.size() - body);
      have_data = true;
      break;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) Malformed("no fmt chunk");
  if (!have_data) Malformed("no data chunk");
  if (channels < 1 || channels > 2) {
    throw Error("unsupported codec: " + std::to_string(channels) + " channels");
  }
  if (sample_rate == 0) Malformed("zero sample rate");

  int bytes_per_sample = 0;
  if (format == kFormatPcm && bits == 16) {
    bytes_per_sample = 2;
  } else if (format == kFormatFloat && bits == 32) {
    bytes_per_sample = 4;
  } else {
    throw Error("unsupported codec: format " + std::to_string(format) + ", " +
                std::to_string(bits) + " bits");
  }

  const std::size_t frame_bytes = static_cast<std::size_t>(bytes_per_sample) * channels;
  const std::size_t frames = data_size / frame_bytes;
  AudioBuffer out(std::vector<double>(frames), static_cast<int>(sample_rate));
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t at = data_offset + i * frame_bytes + c * bytes_per_sample;
      if (bytes_per_sample == 2) {
        acc += Load<std::int16_t>(bytes, at) / 32768.0;
      } else {
        acc += Load<float>(bytes, at);
      }
    }
    out.samples[i] = acc / channels;
  }
  Validate(out, path.string());
  return out;
}

void WriteWav(const std::filesystem::path& path, const AudioBuffer& x, WavEncoding encoding) {
  Validate(x);
  const bool pcm = encoding == WavEncoding::kPcm16;
  const std::uint16_t bits = pcm ? 16 : 32;
  const std::uint16_t block_align = bits / 8;
  const auto data_bytes = static_cast<std::uint32_t>(x.size() * block_align);

  std::vector<char> bytes;
  bytes.reserve(44 + data_bytes);
  bytes.insert(bytes.end(), {'R', 'I', 'F', 'F'});
  Store<std::uint32_t>(bytes, 36 + data_bytes);
  bytes.insert(bytes.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  Store<std::uint32_t>(bytes, 16);
  Store<std::uint16_t>(bytes, pcm ? kFormatPcm : kFormatFloat);
  Store<std::uint16_t>(bytes, 1);
  Store<std::uint32_t>(bytes, static_cast<std::uint32_t>(x.sample_rate));
  Store<std::uint32_t>(bytes, static_cast<std::uint32_t>(x.sample_rate) * block_align);
  Store<std::uint16_t>(bytes, block_align);
  Store<std::uint16_t>(bytes, bits);
  bytes.insert(bytes.end(), {'d', 'a', 't', 'a'});
  Store<std::uint32_t>(bytes, data_bytes);
  for (double v : x.samples) {
    if (pcm) {
      const double scaled = std::round(std::clamp(v, -1.0, 1.0) * 32768.0);
      Store<std::int16_t>(bytes, static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0)));
    } else {
      Store<float>(bytes, static_cast<float>(v));
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace cisimkit::dsp
