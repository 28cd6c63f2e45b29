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

#ifndef CISIMKIT_METRICS_REPORT_H_
#define CISIMKIT_METRICS_REPORT_H_

#include <filesystem>
#include <string>
#include <vector>

#include "cisimkit/dsp/audio.h"
#include "cisimkit/metrics/ncm.h"
#include "cisimkit/metrics/stoi.h"

namespace cisimkit::metrics {

struct MetricInput {
  std::string utterance;
  std::string condition;
  dsp::AudioBuffer clean;
  dsp::AudioBuffer processed;
};

struct MetricRow {
  std::string utterance;
  std::string condition;
  double stoi = 0.0;
  double ncm = 0.0;
};

struct ConditionMean {
  std::string condition;
  int count = 0;
  double stoi = 0.0;
  double ncm = 0.0;
};

struct MetricReport {
  std::vector<MetricRow> rows;         // input order
  std::vector<ConditionMean> means;    // order of first appearance

  // utterance,condition,stoi,ncm rows, then "#mean,<condition>,<stoi>,<ncm>".
  std::string ToCsv() const;
  static MetricReport FromCsv(const std::string& text);
};

// Scores every pair (in parallel when OpenMP is available). Rows come back
// in input order regardless of scheduling.
MetricReport ComputeReport(const std::vector<MetricInput>& inputs, const StoiConfig& stoi_cfg = {},
                           const NcmConfig& ncm_cfg = {});

// Per-condition means recomputed from rows.
std::vector<ConditionMean> MeansByCondition(const std::vector<MetricRow>& rows);

}  // namespace cisimkit::metrics

#endif  // CISIMKIT_METRICS_REPORT_H_
