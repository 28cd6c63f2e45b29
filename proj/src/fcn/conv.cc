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

#include "cisimkit/fcn/conv.h"

#include <algorithm>
#include <string>

#include "cisimkit/error.h"

namespace cisimkit::fcn {
namespace {

constexpr long kTimeBlock = 2048;

// Range of t in [0, out_len) with 0 <= t + shift < in_len.
inline void ValidRange(long shift, long in_len, long out_len, long* lo, long* hi) {
  *lo = std::max(0L, -shift);
  *hi = std::min(out_len, in_len - shift);
}

}  // namespace

std::size_t ConvShape::OutputLength() const {
  Require(in_channels >= 1 && filters >= 1 && filter_len >= 1, "convolution dimensions must be positive");
  if (mode == ConvMode::kSame) return length;
  Require(static_cast<std::size_t>(filter_len) <= length,
          "filter longer than input in valid mode (" + std::to_string(filter_len) + " > " + std::to_string(length) + ")");
  return length - static_cast<std::size_t>(filter_len) + 1;
}

long ConvShape::Offset() const { return mode == ConvMode::kSame ? -static_cast<long>((filter_len - 1) / 2) : 0; }

void ConvForward(const ConvShape& s, const double* x, const double* w, const double* b, double* y) {
  const long out_len = static_cast<long>(s.OutputLength());
  const long in_len = static_cast<long>(s.length);
  const long off = s.Offset();
  const long blocks = (out_len + kTimeBlock - 1) / kTimeBlock;
  const int len = s.filter_len;
#pragma omp parallel for collapse(2) schedule(static)
  for (int f = 0; f < s.filters; ++f) {
    for (long blk = 0; blk < blocks; ++blk) {
      const long t0 = blk * kTimeBlock;
      const long t1 = std::min(out_len, t0 + kTimeBlock);
      double* yr = y + static_cast<long>(f) * out_len;
      std::fill(yr + t0, yr + t1, b ? b[f] : 0.0);
      for (int c = 0; c < s.in_channels; ++c) {
        const double* xr = x + static_cast<long>(c) * in_len;
        const double* wr = w + (static_cast<long>(f) * s.in_channels + c) * len;
        for (int k = 0; k < len; ++k) {
          const double wv = wr[k];
          const long shift = k + off;
          long lo, hi;
          ValidRange(shift, in_len, out_len, &lo, &hi);
          lo = std::max(lo, t0);
          hi = std::min(hi, t1);
          const double* xs = xr + shift;
#pragma omp simd
          for (long t = lo; t < hi; ++t) yr[t] += wv * xs[t];
        }
      }
    }
  }
}

void ConvBackward(const ConvShape& s, const double* x, const double* w, const double* gy, double* gx, double* gw,
                  double* gb) {
  const long out_len = static_cast<long>(s.OutputLength());
  const long in_len = static_cast<long>(s.length);
  const long off = s.Offset();
  const int len = s.filter_len;

#pragma omp parallel for schedule(static)
  for (int f = 0; f < s.filters; ++f) {
    const double* g = gy + static_cast<long>(f) * out_len;
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (long t = 0; t < out_len; ++t) acc += g[t];
    if (gb) gb[f] += acc;
  }
  // Weight gradients: per (filter, channel) pair, walk time in blocks so the
  // gy and x tiles stay in cache across all taps.
  const long pairs = static_cast<long>(s.filters) * s.in_channels;
#pragma omp parallel for schedule(static)
  for (long pc = 0; pc < pairs; ++pc) {
    const long f = pc / s.in_channels;
    const long c = pc % s.in_channels;
    const double* g = gy + f * out_len;
    const double* xr = x + c * in_len;
    double* gwr = gw + pc * len;
    for (long t0 = 0; t0 < out_len; t0 += kTimeBlock) {
      const long t1 = std::min(out_len, t0 + kTimeBlock);
      int k = 0;
      // Four taps per pass share each g[t] load. Their valid ranges differ
      // only near the signal edges, which the scalar tail loop covers.
      for (; k + 4 <= len; k += 4) {
        const long shift = k + off;
        long lo, hi, lo3, hi3;
        ValidRange(shift, in_len, out_len, &lo, &hi);
        ValidRange(shift + 3, in_len, out_len, &lo3, &hi3);
        const long a = std::max(std::max(lo, lo3), t0);
        const long z = std::min(std::min(hi, hi3), t1);
        const double* xs = xr + shift;
        double acc0 = 0.0, acc1 = 0.0, acc2 = 0.0, acc3 = 0.0;
#pragma omp simd reduction(+ : acc0, acc1, acc2, acc3)
        for (long t = a; t < z; ++t) {
          const double gv = g[t];
          acc0 += gv * xs[t];
          acc1 += gv * xs[t + 1];
          acc2 += gv * xs[t + 2];
          acc3 += gv * xs[t + 3];
        }
        double accs[4] = {acc0, acc1, acc2, acc3};
        for (int j = 0; j < 4; ++j) {
          long lj, hj;
          ValidRange(shift + j, in_len, out_len, &lj, &hj);
          lj = std::max(lj, t0);
          hj = std::min(hj, t1);
          const double* xj = xs + j;
          for (long t = lj; t < std::min(a, hj); ++t) accs[j] += g[t] * xj[t];
          for (long t = std::max(z, lj); t < hj; ++t) accs[j] += g[t] * xj[t];
          gwr[k + j] += accs[j];
        }
      }
      for (; k < len; ++k) {
        const long shift = k + off;
        long lo, hi;
        ValidRange(shift, in_len, out_len, &lo, &hi);
        lo = std::max(lo, t0);
        hi = std::min(hi, t1);
        const double* xs = xr + shift;
        double acc = 0.0;
#pragma omp simd reduction(+ : acc)
        for (long t = lo; t < hi; ++t) acc += g[t] * xs[t];
        gwr[k] += acc;
      }
    }
  }

  if (!gx) return;
  // Input gradient: gx[c][t + shift] += w[f][c][k] * gy[f][t], blocked over
  // input time so each thread owns its slice of gx.
  const long blocks = (in_len + kTimeBlock - 1) / kTimeBlock;
#pragma omp parallel for collapse(2) schedule(static)
  for (int c = 0; c < s.in_channels; ++c) {
    for (long blk = 0; blk < blocks; ++blk) {
      const long s0 = blk * kTimeBlock;
      const long s1 = std::min(in_len, s0 + kTimeBlock);
      double* gr = gx + static_cast<long>(c) * in_len;
      std::fill(gr + s0, gr + s1, 0.0);
      for (int f = 0; f < s.filters; ++f) {
        const double* g = gy + static_cast<long>(f) * out_len;
        const double* wr = w + (static_cast<long>(f) * s.in_channels + c) * len;
        for (int k = 0; k < len; ++k) {
          const double wv = wr[k];
          const long shift = k + off;
          // Input index u = t + shift, so t = u - shift.
          const long lo = std::max(s0, shift);
          const long hi = std::min(s1, out_len + shift);
          const double* gs = g - shift;
#pragma omp simd
          for (long u = lo; u < hi; ++u) gr[u] += wv * gs[u];
        }
      }
    }
  }
}

namespace reference {

void ConvForward(const ConvShape& s, const double* x, const double* w, const double* b, double* y) {
  const long out_len = static_cast<long>(s.OutputLength());
  const long in_len = static_cast<long>(s.length);
  const long off = s.Offset();
  for (int f = 0; f < s.filters; ++f) {
    for (long t = 0; t < out_len; ++t) {
      double acc = b ? b[f] : 0.0;
      for (int c = 0; c < s.in_channels; ++c) {
        for (int k = 0; k < s.filter_len; ++k) {
          const long u = t + k + off;
          if (u < 0 || u >= in_len) continue;
          acc += w[(static_cast<long>(f) * s.in_channels + c) * s.filter_len + k] * x[c * in_len + u];
        }
      }
      y[f * out_len + t] = acc;
    }
  }
}

void ConvBackward(const ConvShape& s, const double* x, const double* w, const double* gy, double* gx, double* gw,
                  double* gb) {
  const long out_len = static_cast<long>(s.OutputLength());
  const long in_len = static_cast<long>(s.length);
  const long off = s.Offset();
  if (gx) std::fill(gx, gx + static_cast<long>(s.in_channels) * in_len, 0.0);
  for (int f = 0; f < s.filters; ++f) {
    for (long t = 0; t < out_len; ++t) {
      const double g = gy[f * out_len + t];
      if (gb) gb[f] += g;
      for (int c = 0; c < s.in_channels; ++c) {
        for (int k = 0; k < s.filter_len; ++k) {
          const long u = t + k + off;
          if (u < 0 || u >= in_len) continue;
          const long wi = (static_cast<long>(f) * s.in_channels + c) * s.filter_len + k;
          gw[wi] += g * x[c * in_len + u];
          if (gx) gx[c * in_len + u] += g * w[wi];
        }
      }
    }
  }
}

}  // namespace reference
}  // namespace cisimkit::fcn
