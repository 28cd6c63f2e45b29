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

#ifndef CISIMKIT_STATS_ANOVA_H_
#define CISIMKIT_STATS_ANOVA_H_

#include <optional>
#include <string>
#include <vector>

#include "cisimkit/stats/table.h"

namespace cisimkit::stats {

struct AnovaRow {
  std::string effect;  // "SNR", "SNR:Video", ..., "Residuals"
  int df = 0;
  double sum_sq = 0.0;
  double mean_sq = 0.0;
  std::optional<double> f;  // absent for the residual row and when undefined
  std::optional<double> p;
  std::string error;  // why F is undefined, if it is
};

struct AnovaTable {
  std::vector<AnovaRow> effects;  // main effects, then 2-way, ..., k-way
  AnovaRow residual;
  double total_ss = 0.0;

  const AnovaRow& Effect(const std::string& name) const;

  // Aligned text in the usual Df / Sum Sq / Mean Sq / F value / Pr(>F) layout.
  std::string ToText() const;
  // effect,df,sum_sq,mean_sq,f,p (f and p empty where undefined).
  std::string ToCsv() const;
  static AnovaTable FromCsv(const std::string& text);
};

// Fixed-effects factorial ANOVA with every interaction among `factors`
// (default: all table factors). Requires a complete, balanced crossing
// with at least two observations per cell.
AnovaTable AnovaFactorial(const ObservationTable& table, std::vector<std::string> factors = {});

}  // namespace cisimkit::stats

#endif  // CISIMKIT_STATS_ANOVA_H_
