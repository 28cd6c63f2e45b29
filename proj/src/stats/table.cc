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

#include "cisimkit/stats/table.h"

#include <charconv>
#include <cmath>
#include <map>
#include <tuple>

#include "cisimkit/config.h"
#include "cisimkit/csv.h"
#include "cisimkit/error.h"
#include "cisimkit/stats/ttest.h"

namespace cisimkit::stats {
namespace {

double ParseDouble(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  Require(ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(v), "bad " + what + " '" + s + "'");
  return v;
}

int ParseInt(const std::string& s, const std::string& what) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  Require(ec == std::errc() && ptr == s.data() + s.size(), "bad " + what + " '" + s + "'");
  return v;
}

bool ParseBool(const std::string& s, const std::string& what) {
  if (s == "1" || s == "true" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "no") return false;
  throw Error("bad " + what + " '" + s + "'");
}

std::vector<CsvRow> DataRows(const std::string& text) {
  std::vector<CsvRow> rows;
  for (CsvRow& r : ParseCsv(text)) {
    if (r.empty() || (r.size() == 1 && r[0].empty())) continue;
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

std::size_t ObservationTable::FactorIndex(const std::string& name) const {
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i] == name) return i;
  }
  throw Error("unknown factor '" + name + "'");
}

void ObservationTable::Validate() const {
  for (const Observation& o : rows) {
    Require(o.levels.size() == factors.size(), "observation has " + std::to_string(o.levels.size()) +
                                                   " factor levels, table has " + std::to_string(factors.size()));
    Require(std::isfinite(o.response), "non-finite response for subject " + o.subject);
  }
}

std::string ObservationTable::ToCsv() const {
  CsvRow header{"subject"};
  header.insert(header.end(), factors.begin(), factors.end());
  header.push_back("response");
  std::string out = CsvLine(header);
  for (const Observation& o : rows) {
    CsvRow r{o.subject};
    r.insert(r.end(), o.levels.begin(), o.levels.end());
    r.push_back(FormatNumber(o.response));
    out += CsvLine(r);
  }
  return out;
}

ObservationTable ObservationTable::FromCsv(const std::string& text) {
  const std::vector<CsvRow> rows = DataRows(text);
  Require(!rows.empty(), "observation table is empty");
  const CsvRow& header = rows[0];
  Require(header.size() >= 2 && header.front() == "subject" && header.back() == "response",
          "observation table header must be subject,<factors...>,response");
  ObservationTable t;
  t.factors.assign(header.begin() + 1, header.end() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const CsvRow& r = rows[i];
    Require(r.size() == header.size(), "observation table line " + std::to_string(i + 1) + " has " +
                                           std::to_string(r.size()) + " fields, expected " +
                                           std::to_string(header.size()));
    t.rows.push_back({r.front(), CsvRow(r.begin() + 1, r.end() - 1), ParseDouble(r.back(), "response")});
  }
  t.Validate();
  return t;
}

std::string ResultRowCsv(const ResultRow& r) {
  std::string line = CsvLine({r.participant, FormatNumber(r.snr_db), std::to_string(r.trial), r.condition,
                              r.video ? "1" : "0", std::to_string(r.score), r.replay_used ? "1" : "0", r.timestamp});
  line.pop_back();
  return line;
}

bool LooksLikeResultsCsv(const std::string& text) { return text.rfind(kResultsHeader, 0) == 0; }

std::vector<ResultRow> ParseResultsCsv(const std::string& text) {
  const std::vector<CsvRow> rows = DataRows(text);
  Require(!rows.empty(), "results file is empty");
  const CsvRow& h = rows[0];
  const std::size_t participant = CsvColumn(h, "participant", "results"), snr = CsvColumn(h, "snr_db", "results"),
                    trial = CsvColumn(h, "trial", "results"), cond = CsvColumn(h, "condition", "results"),
                    video = CsvColumn(h, "video", "results"), score = CsvColumn(h, "score", "results"),
                    replay = CsvColumn(h, "replay_used", "results"), ts = CsvColumn(h, "timestamp", "results");
  std::vector<ResultRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const CsvRow& r = rows[i];
    Require(r.size() == h.size(), "results line " + std::to_string(i + 1) + " has the wrong number of fields");
    ResultRow row;
    row.participant = r[participant];
    row.snr_db = ParseDouble(r[snr], "snr_db");
    row.trial = ParseInt(r[trial], "trial index");
    row.condition = r[cond];
    row.video = ParseBool(r[video], "video flag");
    row.score = ParseInt(r[score], "score");
    Require(row.score >= 0 && row.score <= 10, "score out of range on results line " + std::to_string(i + 1));
    row.replay_used = ParseBool(r[replay], "replay_used flag");
    row.timestamp = r[ts];
    out.push_back(std::move(row));
  }
  return out;
}

ObservationTable AggregateResults(const std::vector<ResultRow>& rows, const AggregateOptions& opts) {
  ObservationTable t;
  t.factors = {"SNR", "Video", "Condition"};
  using Key = std::tuple<std::string, std::string, std::string, std::string>;
  std::map<Key, std::pair<double, int>> cells;
  std::vector<Key> order;
  for (const ResultRow& r : rows) {
    if (r.trial < opts.practice_trials) continue;
    const double percent = 10.0 * r.score;
    Key key{r.participant, FormatNumber(r.snr_db), r.video ? "yes" : "no", r.condition};
    if (opts.per_trial) {
      t.rows.push_back({r.participant, {std::get<1>(key), std::get<2>(key), std::get<3>(key)}, percent});
      continue;
    }
    auto [it, inserted] = cells.try_emplace(key, 0.0, 0);
    if (inserted) order.push_back(key);
    it->second.first += percent;
    it->second.second += 1;
  }
  for (const Key& k : order) {
    const auto& [sum, n] = cells.at(k);
    t.rows.push_back({std::get<0>(k), {std::get<1>(k), std::get<2>(k), std::get<3>(k)}, sum / n});
  }
  return t;
}

std::vector<GroupSummary> DescriptiveSummary(const ObservationTable& table,
                                             const std::vector<std::string>& group_by) {
  Require(!table.rows.empty(), "descriptive summary of an empty table");
  std::vector<std::size_t> idx;
  for (const std::string& f : group_by) idx.push_back(table.FactorIndex(f));
  std::map<std::vector<std::string>, std::size_t> slot;
  std::vector<GroupSummary> groups;
  std::vector<std::vector<double>> values;
  for (const Observation& o : table.rows) {
    std::vector<std::string> levels;
    for (std::size_t i : idx) levels.push_back(o.levels[i]);
    auto [it, inserted] = slot.try_emplace(levels, groups.size());
    if (inserted) {
      groups.push_back({levels, 0, 0.0, 0.0});
      values.emplace_back();
    }
    values[it->second].push_back(o.response);
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    groups[g].n = static_cast<int>(values[g].size());
    groups[g].mean = Mean(values[g]);
    groups[g].sd = SampleSd(values[g]);
  }
  return groups;
}

std::string SummaryToCsv(const std::vector<std::string>& group_by, const std::vector<GroupSummary>& groups) {
  CsvRow header = group_by;
  header.insert(header.end(), {"n", "mean", "sd"});
  std::string out = CsvLine(header);
  for (const GroupSummary& g : groups) {
    CsvRow r = g.levels;
    r.insert(r.end(), {std::to_string(g.n), FormatNumber(g.mean), std::isnan(g.sd) ? "NA" : FormatNumber(g.sd)});
    out += CsvLine(r);
  }
  return out;
}

}  // namespace cisimkit::stats
