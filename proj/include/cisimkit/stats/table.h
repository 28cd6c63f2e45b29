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

#ifndef CISIMKIT_STATS_TABLE_H_
#define CISIMKIT_STATS_TABLE_H_

#include <string>
#include <vector>

namespace cisimkit::stats {

struct Observation {
  std::string subject;
  std::vector<std::string> levels;  // one per factor, in table order
  double response = 0.0;
};

// Long-format data: one response per row plus its factor levels.
struct ObservationTable {
  std::vector<std::string> factors;
  std::vector<Observation> rows;

  // Index of a factor by name; throws Error if absent.
  std::size_t FactorIndex(const std::string& name) const;
  void Validate() const;

  // subject,<factor...>,response
  std::string ToCsv() const;
  static ObservationTable FromCsv(const std::string& text);
};

// One answered trial as exported by the experiment service.
struct ResultRow {
  std::string participant;
  double snr_db = 0.0;
  int trial = 0;
  std::string condition;
  bool video = false;
  int score = 0;  // characters correct, 0..10
  bool replay_used = false;
  std::string timestamp;
};

inline constexpr char kResultsHeader[] = "participant,snr_db,trial,condition,video,score,replay_used,timestamp";

std::string ResultRowCsv(const ResultRow& r);  // one line, no newline
std::vector<ResultRow> ParseResultsCsv(const std::string& text);
bool LooksLikeResultsCsv(const std::string& text);

struct AggregateOptions {
  // false: one row per subject and (SNR, Video, Condition) cell holding the
  // mean accuracy in percent. true: one row per trial.
  bool per_trial = false;
  // Trials with index below this belong to the practice block and are
  // dropped.
  int practice_trials = 20;
};

// Factors SNR, Video (yes/no) and Condition; responses in percent
// (score * 10).
ObservationTable AggregateResults(const std::vector<ResultRow>& rows, const AggregateOptions& opts = {});

struct GroupSummary {
  std::vector<std::string> levels;  // values of the group_by factors
  int n = 0;
  double mean = 0.0;
  double sd = 0.0;  // n - 1 denominator; NaN when n == 1
};

// Groups in order of first appearance. An empty group_by puts all rows in
// one group.
std::vector<GroupSummary> DescriptiveSummary(const ObservationTable& table,
                                             const std::vector<std::string>& group_by);
std::string SummaryToCsv(const std::vector<std::string>& group_by, const std::vector<GroupSummary>& groups);

}  // namespace cisimkit::stats

#endif  // CISIMKIT_STATS_TABLE_H_
