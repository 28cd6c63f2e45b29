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

#include "cisimkit/dsp/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "cisimkit/error.h"

namespace cisimkit::dsp {
namespace {

// FFTW's planner is not re-entrant.
std::mutex& PlannerMutex() {
  static std::mutex mutex;
  return mutex;
}

}  // namespace

Fft::Fft(std::size_t size) : size_(size) {
  Require(size >= 2, "FFT size must be at least 2");
  const int n = static_cast<int>(size);
  real_buf_ = fftw_alloc_real(size);
  complex_buf_ = fftw_alloc_complex(size / 2 + 1);
  full_in_ = fftw_alloc_complex(size);
  full_out_ = fftw_alloc_complex(size);
  std::lock_guard<std::mutex> lock(PlannerMutex());
  r2c_plan_ = fftw_plan_dft_r2c_1d(n, real_buf_, static_cast<fftw_complex*>(complex_buf_),
                                   FFTW_ESTIMATE);
  c2c_plan_ = fftw_plan_dft_1d(n, static_cast<fftw_complex*>(full_in_),
                               static_cast<fftw_complex*>(full_out_), FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft::~Fft() {
  {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    fftw_destroy_plan(static_cast<fftw_plan>(r2c_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(c2c_plan_));
  }
  fftw_free(real_buf_);
  fftw_free(complex_buf_);
  fftw_free(full_in_);
  fftw_free(full_out_);
}

void Fft::Forward(std::span<const double> input, std::span<std::complex<double>> bins) {
  Require(input.size() <= size_, "FFT input longer than transform size");
  Require(bins.size() == num_bins(), "FFT output span has the wrong size");
  std::copy(input.begin(), input.end(), real_buf_);
  std::fill(real_buf_ + input.size(), real_buf_ + size_, 0.0);
  fftw_execute(static_cast<fftw_plan>(r2c_plan_));
  const auto* out = static_cast<const fftw_complex*>(complex_buf_);
  for (std::size_t k = 0; k < bins.size(); ++k) bins[k] = {out[k][0], out[k][1]};
}

void Fft::InverseReal(std::span<const std::complex<double>> spectrum, std::span<double> out) {
  Require(spectrum.size() == size_ && out.size() == size_, "inverse FFT size mismatch");
  auto* in = static_cast<fftw_complex*>(full_in_);
  for (std::size_t k = 0; k < size_; ++k) {
    in[k][0] = spectrum[k].real();
    in[k][1] = spectrum[k].imag();
  }
  fftw_execute(static_cast<fftw_plan>(c2c_plan_));
  const auto* result = static_cast<const fftw_complex*>(full_out_);
  for (std::size_t n = 0; n < size_; ++n) out[n] = result[n][0];
}

}  // namespace cisimkit::dsp
