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

#ifndef CISIMKIT_STATS_DISTRIBUTIONS_H_
#define CISIMKIT_STATS_DISTRIBUTIONS_H_

namespace cisimkit::stats {

// All of these go through the regularized incomplete beta function
// I_x(a, b). Degrees of freedom must be >= 1 (non-integer allowed).

double TCdf(double x, double df);
// P(|T| >= |t|).
double TTwoSidedP(double t, double df);

double FCdf(double x, double d1, double d2);  // x >= 0
// P(F >= x), computed from the complementary function so small p-values
// keep their relative precision.
double FSurvival(double x, double d1, double d2);

}  // namespace cisimkit::stats

#endif  // CISIMKIT_STATS_DISTRIBUTIONS_H_
