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

#include "cisimkit/stats/distributions.h"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <string>

#include "cisimkit/error.h"

namespace cisimkit::stats {
namespace {

void CheckDf(double df, const char* name) {
  Require(std::isfinite(df) && df >= 1.0, std::string("invalid degrees of freedom ") + name + " = " + std::to_string(df));
}

}  // namespace

double TCdf(double x, double df) {
  CheckDf(df, "df");
  Require(!std::isnan(x), "t_cdf argument is NaN");
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  if (x == 0.0) return 0.5;
  // P(T <= -|x|) = I_{df/(df+x^2)}(df/2, 1/2) / 2
  const double tail = 0.5 * boost::math::ibeta(0.5 * df, 0.5, df / (df + x * x));
  return x < 0.0 ? tail : 1.0 - tail;
}

double TTwoSidedP(double t, double df) {
  CheckDf(df, "df");
  Require(!std::isnan(t), "t statistic is NaN");
  if (std::isinf(t)) return 0.0;
  return boost::math::ibeta(0.5 * df, 0.5, df / (df + t * t));
}

double FCdf(double x, double d1, double d2) {
  CheckDf(d1, "d1");
  CheckDf(d2, "d2");
  Require(x >= 0.0, "f_cdf argument must be non-negative");
  if (std::isinf(x)) return 1.0;
  return boost::math::ibeta(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2));
}

double FSurvival(double x, double d1, double d2) {
  CheckDf(d1, "d1");
  CheckDf(d2, "d2");
  Require(x >= 0.0, "F statistic must be non-negative");
  if (std::isinf(x)) return 0.0;
  return boost::math::ibetac(0.5 * d1, 0.5 * d2, d1 * x / (d1 * x + d2));
}

}  // namespace cisimkit::stats
