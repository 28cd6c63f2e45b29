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

#include "cisimkit/metrics/report.h"

#include <exception>
#include <map>

#include "cisimkit/config.h"
#include "cisimkit/csv.h"
#include "cisimkit/error.h"

namespace cisimkit::metrics {

std::vector<ConditionMean> MeansByCondition(const std::vector<MetricRow>& rows) {
  std::vector<ConditionMean> means;
  std::map<std::string, std::size_t> slot;
  for (const MetricRow& r : rows) {
    auto [it, fresh] = slot.emplace(r.condition, means.size());
    if (fresh) means.push_back({r.condition, 0, 0.0, 0.0});
    ConditionMean& m = means[it->second];
    ++m.count;
    m.stoi += r.stoi;
    m.ncm += r.ncm;
  }
  for (ConditionMean& m : means) {
    m.stoi /= m.count;
    m.ncm /= m.count;
  }
  return means;
}

MetricReport ComputeReport(const std::vector<MetricInput>& inputs, const StoiConfig& stoi_cfg,
                           const NcmConfig& ncm_cfg) {
  Require(!inputs.empty(), "metric report needs at least one clean/processed pair");
  MetricReport report;
  report.rows.resize(inputs.size());
  std::vector<std::exception_ptr> errors(inputs.size());
  const long n = static_cast<long>(inputs.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    const MetricInput& in = inputs[static_cast<std::size_t>(i)];
    try {
      Require(in.clean.sample_rate == in.processed.sample_rate,
              "sample-rate mismatch for utterance " + in.utterance);
      StoiEvaluator stoi(stoi_cfg, in.clean.sample_rate);
      NcmEvaluator ncm(ncm_cfg, in.clean.sample_rate);
      report.rows[static_cast<std::size_t>(i)] = {in.utterance, in.condition,
                                                  stoi.Evaluate(in.clean.samples, in.processed.samples),
                                                  ncm.Evaluate(in.clean, in.processed).score};
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const Error& e) {
      throw Error(inputs[i].utterance + " (" + inputs[i].condition + "): " + e.what());
    }
  }
  report.means = MeansByCondition(report.rows);
  return report;
}

std::string MetricReport::ToCsv() const {
  std::string out = "utterance,condition,stoi,ncm\n";
  for (const MetricRow& r : rows) {
    out += CsvLine({r.utterance, r.condition, FormatNumber(r.stoi), FormatNumber(r.ncm)});
  }
  for (const ConditionMean& m : means) {
    out += CsvLine({"#mean", m.condition, FormatNumber(m.stoi), FormatNumber(m.ncm)});
  }
  return out;
}

MetricReport MetricReport::FromCsv(const std::string& text) {
  const std::vector<CsvRow> rows = ParseCsv(text);
  Require(!rows.empty() && rows[0] == CsvRow{"utterance", "condition", "stoi", "ncm"},
          "metric report must start with the header utterance,condition,stoi,ncm");
  MetricReport report;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const CsvRow& r = rows[i];
    Require(r.size() == 4, "metric report row " + std::to_string(i) + " needs 4 fields");
    try {
      if (r[0] == "#mean") {
        report.means.push_back({r[1], 0, std::stod(r[2]), std::stod(r[3])});
      } else {
        report.rows.push_back({r[0], r[1], std::stod(r[2]), std::stod(r[3])});
      }
    } catch (const std::logic_error&) {
      throw Error("metric report row " + std::to_string(i) + " has a bad number");
    }
  }
  // Counts are not serialized; recover them from the rows.
  for (ConditionMean& m : report.means) {
    for (const MetricRow& r : report.rows) m.count += r.condition == m.condition;
  }
  return report;
}

}  // namespace cisimkit::metrics
