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

#include "cisimkit/stats/anova.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>

#include "cisimkit/config.h"
#include "cisimkit/csv.h"
#include "cisimkit/error.h"
#include "cisimkit/stats/distributions.h"

namespace cisimkit::stats {
namespace {

// Effect subsets as bitmasks over the factor list, ordered by size and then
// lexicographically by factor position: A, B, C, A:B, A:C, B:C, A:B:C.
std::vector<unsigned> EffectOrder(std::size_t k) {
  std::vector<unsigned> masks;
  for (unsigned m = 1; m < (1u << k); ++m) masks.push_back(m);
  std::stable_sort(masks.begin(), masks.end(), [](unsigned a, unsigned b) {
    if (std::popcount(a) != std::popcount(b)) return std::popcount(a) < std::popcount(b);
    // Lexicographic on ascending factor indices: compare lowest differing bit.
    const unsigned diff = a ^ b;
    const unsigned low = diff & (~diff + 1);
    return (a & low) != 0;
  });
  return masks;
}

std::string FormatCell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string FormatP(double p) {
  char buf[32];
  if (p < 2.2e-16) return "<2.2e-16";
  std::snprintf(buf, sizeof(buf), "%.4g", p);
  return buf;
}

std::optional<double> OptionalNumber(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  Require(ec == std::errc() && ptr == s.data() + s.size(), "bad number '" + s + "' in ANOVA table");
  return v;
}

}  // namespace

const AnovaRow& AnovaTable::Effect(const std::string& name) const {
  for (const AnovaRow& r : effects) {
    if (r.effect == name) return r;
  }
  throw Error("no ANOVA effect named '" + name + "'");
}

AnovaTable AnovaFactorial(const ObservationTable& table, std::vector<std::string> factors) {
  table.Validate();
  if (factors.empty()) factors = table.factors;
  Require(!factors.empty(), "ANOVA needs at least one factor");
  Require(factors.size() <= 8, "ANOVA supports at most 8 factors");
  Require(!table.rows.empty(), "ANOVA on an empty table");
  const std::size_t k = factors.size();

  // Level indices per factor, in order of first appearance.
  std::vector<std::size_t> column(k);
  std::vector<std::map<std::string, std::size_t>> level_index(k);
  std::vector<std::vector<std::string>> level_names(k);
  for (std::size_t i = 0; i < k; ++i) column[i] = table.FactorIndex(factors[i]);
  for (const Observation& o : table.rows) {
    for (std::size_t i = 0; i < k; ++i) {
      const std::string& lv = o.levels[column[i]];
      if (level_index[i].try_emplace(lv, level_names[i].size()).second) level_names[i].push_back(lv);
    }
  }
  std::vector<std::size_t> n_levels(k);
  std::size_t num_cells = 1;
  for (std::size_t i = 0; i < k; ++i) {
    n_levels[i] = level_names[i].size();
    Require(n_levels[i] >= 2, "factor " + factors[i] + " has only one level");
    num_cells *= n_levels[i];
  }

  // Cell of each observation, mixed radix with factor 0 most significant.
  std::vector<std::size_t> cell_of(table.rows.size());
  std::vector<double> cell_sum(num_cells, 0.0);
  std::vector<std::size_t> cell_count(num_cells, 0);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < k; ++i) c = c * n_levels[i] + level_index[i].at(table.rows[r].levels[column[i]]);
    cell_of[r] = c;
    cell_sum[c] += table.rows[r].response;
    ++cell_count[c];
  }
  auto cell_name = [&](std::size_t c) {
    std::string name;
    for (std::size_t i = k; i-- > 0;) {
      name = factors[i] + "=" + level_names[i][c % n_levels[i]] + (name.empty() ? "" : ", ") + name;
      c /= n_levels[i];
    }
    return name;
  };
  const std::size_t reps = cell_count[0];
  for (std::size_t c = 0; c < num_cells; ++c) {
    Require(cell_count[c] > 0, "incomplete crossing: no observations for " + cell_name(c));
    Require(cell_count[c] == reps, "unbalanced design: " + cell_name(c) + " has " + std::to_string(cell_count[c]) +
                                       " observations, " + cell_name(0) + " has " + std::to_string(reps));
  }
  Require(reps >= 2, "zero residual df: every cell needs at least two observations");

  std::vector<double> cell_mean(num_cells);
  for (std::size_t c = 0; c < num_cells; ++c) cell_mean[c] = cell_sum[c] / static_cast<double>(reps);
  const double n_total = static_cast<double>(table.rows.size());

  // Marginal means for every subset of factors (mask 0 = grand mean). In a
  // balanced design these are plain averages of cell means.
  auto project = [&](std::size_t c, unsigned mask) {
    std::vector<std::size_t> d(k);
    for (std::size_t i = k; i-- > 0;) {
      d[i] = c % n_levels[i];
      c /= n_levels[i];
    }
    std::size_t idx = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (mask & (1u << i)) idx = idx * n_levels[i] + d[i];
    }
    return idx;
  };
  auto subset_cells = [&](unsigned mask) {
    std::size_t n = 1;
    for (std::size_t i = 0; i < k; ++i) {
      if (mask & (1u << i)) n *= n_levels[i];
    }
    return n;
  };
  const unsigned full = (1u << k) - 1;
  std::vector<std::vector<double>> marginal(full + 1);
  for (unsigned mask = 0; mask <= full; ++mask) {
    std::vector<double>& m = marginal[mask];
    m.assign(subset_cells(mask), 0.0);
    for (std::size_t c = 0; c < num_cells; ++c) m[project(c, mask)] += cell_mean[c];
    const double per = static_cast<double>(num_cells / m.size());
    for (double& v : m) v /= per;
  }

  AnovaTable out;
  double resid_ss = 0.0, total_ss = 0.0;
  const double grand = marginal[0][0];
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const double y = table.rows[r].response;
    resid_ss += (y - cell_mean[cell_of[r]]) * (y - cell_mean[cell_of[r]]);
    total_ss += (y - grand) * (y - grand);
  }
  out.total_ss = total_ss;
  out.residual.effect = "Residuals";
  out.residual.df = static_cast<int>(table.rows.size() - num_cells);
  out.residual.sum_sq = resid_ss;
  out.residual.mean_sq = resid_ss / out.residual.df;

  for (unsigned mask : EffectOrder(k)) {
    AnovaRow row;
    row.df = 1;
    for (std::size_t i = 0; i < k; ++i) {
      if (!(mask & (1u << i))) continue;
      row.effect += (row.effect.empty() ? "" : ":") + factors[i];
      row.df *= static_cast<int>(n_levels[i] - 1);
    }
    // Interaction contrast by inclusion-exclusion over the sub-margins:
    // e_S(c) = sum over T subset of S of (-1)^{|S|-|T|} mean_T(c).
    const std::size_t cells_s = subset_cells(mask);
    std::vector<double> effect(cells_s, 0.0);
    std::vector<bool> seen(cells_s, false);
    for (std::size_t c = 0; c < num_cells; ++c) {
      const std::size_t cs = project(c, mask);
      if (seen[cs]) continue;
      seen[cs] = true;
      double e = 0.0;
      for (unsigned t = mask;; t = (t - 1) & mask) {
        const double sign = (std::popcount(mask) - std::popcount(t)) % 2 ? -1.0 : 1.0;
        e += sign * marginal[t][project(c, t)];
        if (t == 0) break;
      }
      effect[cs] = e;
    }
    double ss = 0.0;
    for (double e : effect) ss += e * e;
    row.sum_sq = ss * n_total / static_cast<double>(cells_s);
    row.mean_sq = row.sum_sq / row.df;
    if (out.residual.mean_sq > 0.0) {
      row.f = row.mean_sq / out.residual.mean_sq;
      row.p = FSurvival(*row.f, row.df, out.residual.df);
    } else {
      row.error = "F undefined: zero residual mean square";
    }
    out.effects.push_back(std::move(row));
  }
  return out;
}

std::string AnovaTable::ToText() const {
  std::size_t name_w = residual.effect.size();
  for (const AnovaRow& r : effects) name_w = std::max(name_w, r.effect.size());
  const std::vector<std::string> head{"Df", "Sum Sq", "Mean Sq", "F value", "Pr(>F)"};
  std::vector<std::vector<std::string>> cells;
  for (const AnovaRow& r : effects) {
    cells.push_back({r.effect, std::to_string(r.df), FormatCell(r.sum_sq), FormatCell(r.mean_sq),
                     r.f ? FormatCell(*r.f) : "NA", r.p ? FormatP(*r.p) : "NA"});
  }
  cells.push_back({residual.effect, std::to_string(residual.df), FormatCell(residual.sum_sq),
                   FormatCell(residual.mean_sq), "", ""});
  std::vector<std::size_t> w(head.size());
  for (std::size_t j = 0; j < head.size(); ++j) {
    w[j] = head[j].size();
    for (const auto& row : cells) w[j] = std::max(w[j], row[j + 1].size());
  }
  auto pad_left = [](const std::string& s, std::size_t n) { return std::string(n - s.size(), ' ') + s; };
  std::string out = std::string(name_w, ' ');
  for (std::size_t j = 0; j < head.size(); ++j) out += " " + pad_left(head[j], w[j]);
  out += "\n";
  for (const auto& row : cells) {
    std::string line = row[0] + std::string(name_w - row[0].size(), ' ');
    for (std::size_t j = 0; j < head.size(); ++j) line += " " + pad_left(row[j + 1], w[j]);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  for (const AnovaRow& r : effects) {
    if (!r.error.empty()) out += r.effect + ": " + r.error + "\n";
  }
  return out;
}

std::string AnovaTable::ToCsv() const {
  std::string out = CsvLine({"effect", "df", "sum_sq", "mean_sq", "f", "p"});
  for (const AnovaRow& r : effects) {
    out += CsvLine({r.effect, std::to_string(r.df), FormatNumber(r.sum_sq), FormatNumber(r.mean_sq),
                    r.f ? FormatNumber(*r.f) : "", r.p ? FormatNumber(*r.p) : ""});
  }
  out += CsvLine({residual.effect, std::to_string(residual.df), FormatNumber(residual.sum_sq),
                  FormatNumber(residual.mean_sq), "", ""});
  return out;
}

AnovaTable AnovaTable::FromCsv(const std::string& text) {
  const std::vector<CsvRow> rows = ParseCsv(text);
  Require(!rows.empty() && rows[0] == CsvRow({"effect", "df", "sum_sq", "mean_sq", "f", "p"}),
          "ANOVA CSV header must be effect,df,sum_sq,mean_sq,f,p");
  AnovaTable t;
  bool have_residual = false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const CsvRow& r = rows[i];
    if (r.size() == 1 && r[0].empty()) continue;
    Require(r.size() == 6, "ANOVA CSV line " + std::to_string(i + 1) + " needs 6 fields");
    AnovaRow row;
    row.effect = r[0];
    row.df = static_cast<int>(OptionalNumber(r[1]).value_or(-1));
    Require(row.df >= 1, "ANOVA CSV line " + std::to_string(i + 1) + ": df must be a positive integer");
    row.sum_sq = OptionalNumber(r[2]).value_or(0.0);
    row.mean_sq = OptionalNumber(r[3]).value_or(0.0);
    row.f = OptionalNumber(r[4]);
    row.p = OptionalNumber(r[5]);
    if (row.effect == "Residuals") {
      t.residual = row;
      have_residual = true;
    } else {
      t.effects.push_back(row);
    }
  }
  Require(have_residual, "ANOVA CSV has no Residuals row");
  t.total_ss = t.residual.sum_sq;
  for (const AnovaRow& r : t.effects) t.total_ss += r.sum_sq;
  return t;
}

}  // namespace cisimkit::stats
