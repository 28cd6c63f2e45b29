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

#include "cisimkit/stats/ttest.h"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "cisimkit/error.h"
#include "cisimkit/stats/distributions.h"

namespace cisimkit::stats {

double Mean(std::span<const double> x) {
  Require(!x.empty(), "mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double SampleSd(std::span<const double> x) {
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = Mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

TTestResult PairedTTest(std::span<const double> a, std::span<const double> b) {
  Require(a.size() == b.size(), "paired t-test length mismatch: " + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()));
  Require(a.size() >= 2, "paired t-test needs at least 2 pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double sd = SampleSd(d);
  Require(sd > 0.0, "zero-variance differences");

  TTestResult r;
  r.n = static_cast<int>(a.size());
  r.mean_a = Mean(a);
  r.mean_b = Mean(b);
  r.sd_a = SampleSd(a);
  r.sd_b = SampleSd(b);
  r.df = r.n - 1;
  r.t = Mean(d) / (sd / std::sqrt(static_cast<double>(r.n)));
  r.p = TTwoSidedP(r.t, r.df);
  return r;
}

TTestResult PooledTTest(std::span<const double> a, std::span<const double> b) {
  Require(!a.empty() && !b.empty() && a.size() + b.size() >= 3, "pooled t-test needs at least 3 observations");
  TTestResult r;
  r.n = static_cast<int>(a.size() + b.size());
  r.mean_a = Mean(a);
  r.mean_b = Mean(b);
  r.sd_a = SampleSd(a);
  r.sd_b = SampleSd(b);
  double ss = 0.0;
  for (double v : a) ss += (v - r.mean_a) * (v - r.mean_a);
  for (double v : b) ss += (v - r.mean_b) * (v - r.mean_b);
  r.df = r.n - 2;
  const double pooled = ss / r.df;
  Require(pooled > 0.0, "zero within-group variance");
  const double se = std::sqrt(pooled * (1.0 / static_cast<double>(a.size()) + 1.0 / static_cast<double>(b.size())));
  r.t = (r.mean_a - r.mean_b) / se;
  r.p = TTwoSidedP(r.t, r.df);
  return r;
}

}  // namespace cisimkit::stats
