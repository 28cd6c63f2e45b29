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

#ifndef CISIMKIT_DSP_FFT_H_
#define CISIMKIT_DSP_FFT_H_

#include <complex>
#include <cstddef>
#include <span>

namespace cisimkit::dsp {

// Owns FFTW plans and aligned buffers for one transform size. Plan creation
// is serialized internally; an instance must not be shared between threads,
// but separate instances may run concurrently.
class Fft {
 public:
  explicit Fft(std::size_t size);
  ~Fft();
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::size_t size() const { return size_; }
  std::size_t num_bins() const { return size_ / 2 + 1; }

  // Real forward transform of `input` zero-padded to size(); writes
  // num_bins() coefficients. Unnormalized.
  void Forward(std::span<const double> input, std::span<std::complex<double>> bins);

  // out[n] = Re(sum_k spectrum[k] * exp(+2*pi*i*k*n/size)) over a full
  // length-size() complex spectrum. Unnormalized.
  void InverseReal(std::span<const std::complex<double>> spectrum, std::span<double> out);

 private:
  std::size_t size_;
  double* real_buf_;
  void* complex_buf_;
  void* full_in_;
  void* full_out_;
  void* r2c_plan_;
  void* c2c_plan_;
};

}  // namespace cisimkit::dsp

#endif  // CISIMKIT_DSP_FFT_H_
