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

#ifndef CISIMKIT_STATS_TTEST_H_
#define CISIMKIT_STATS_TTEST_H_

#include <span>

namespace cisimkit::stats {

struct TTestResult {
  int n = 0;  // pairs (paired) or total observations (pooled)
  double mean_a = 0.0, mean_b = 0.0;
  double sd_a = 0.0, sd_b = 0.0;  // n - 1 denominators
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

// d = a - b, t = mean(d) / (sd(d) / sqrt(n)), df = n - 1.
TTestResult PairedTTest(std::span<const double> a, std::span<const double> b);

// Two-sample test with pooled variance, df = n_a + n_b - 2. n holds
// n_a + n_b.
TTestResult PooledTTest(std::span<const double> a, std::span<const double> b);

// Arithmetic mean and n - 1 standard deviation (NaN for one value).
double Mean(std::span<const double> x);
double SampleSd(std::span<const double> x);

}  // namespace cisimkit::stats

#endif  // CISIMKIT_STATS_TTEST_H_
