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

#include "cisimkit/corpus/corpus.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <json.hpp>

#include "cisimkit/config.h"
#include "cisimkit/csv.h"
#include "cisimkit/error.h"

namespace cisimkit::corpus {

std::string_view ConditionName(Condition c) {
  switch (c) {
    case Condition::kClean: return "Clean";
    case Condition::kFcnE: return "FCN_E";
    case Condition::kFcnS: return "FCN_S";
    case Condition::kNoisyE: return "Noisy_E";
    case Condition::kNoisyS: return "Noisy_S";
  }
  throw std::logic_error("unknown condition");
}

Condition ParseCondition(std::string_view name) {
  for (Condition c : kAllConditions) {
    if (ConditionName(c) == name) return c;
  }
  throw Error("unknown condition '" + std::string(name) +
              "' (expected Clean, FCN_E, FCN_S, Noisy_E or Noisy_S)");
}

bool IsEnhanced(Condition c) { return c == Condition::kFcnE || c == Condition::kFcnS; }
bool HasNoise(Condition c) { return c != Condition::kClean; }

std::vector<double> NoiseSegment(const dsp::AudioBuffer& noise, std::size_t offset, std::size_t length) {
  Require(!noise.empty(), "empty noise");
  std::vector<double> seg(length);
  const std::size_t n = noise.size();
  for (std::size_t i = 0; i < length; ++i) seg[i] = noise.samples[(offset + i) % n];
  return seg;
}

MixResult MixAtSnr(const dsp::AudioBuffer& speech, const dsp::AudioBuffer& noise, double snr_db,
                   std::uint64_t seed) {
  Require(!noise.empty(), "empty noise");
  Require(std::isfinite(snr_db), "SNR must be finite");
  Require(speech.sample_rate == noise.sample_rate,
          "sample-rate mismatch between speech (" + std::to_string(speech.sample_rate) + " Hz) and noise (" +
              std::to_string(noise.sample_rate) + " Hz)");
  const double speech_rms = dsp::Rms(speech);
  Require(speech_rms > 0.0, "silent speech");

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, noise.size() - 1);
  MixResult r;
  r.offset = pick(rng);
  const std::vector<double> seg = NoiseSegment(noise, r.offset, speech.size());
  const double noise_rms = dsp::Rms(seg);
  Require(noise_rms > 0.0, "silent noise segment");
  r.scale = speech_rms / (noise_rms * std::pow(10.0, snr_db / 20.0));
  r.noisy = speech;
  for (std::size_t i = 0; i < seg.size(); ++i) r.noisy.samples[i] += r.scale * seg[i];
  return r;
}

CorpusSplit SplitCorpus(const std::vector<std::string>& ids, std::uint64_t seed, std::size_t n_train,
                        std::size_t n_test) {
  Require(ids.size() >= 2, "too few ids: need at least 2");
  Require(n_train + n_test <= ids.size(), "too few ids: requested " + std::to_string(n_train) + " train + " +
                                              std::to_string(n_test) + " test from " +
                                              std::to_string(ids.size()));
  Require(std::set<std::string>(ids.begin(), ids.end()).size() == ids.size(), "duplicate utterance ids");
  std::vector<std::string> shuffled = ids;
  std::mt19937_64 rng(seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CorpusSplit split;
  split.seed = seed;
  split.train_ids.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test_ids.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(n_train),
                        shuffled.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
  return split;
}

std::string SnrTag(double snr_db) { return FormatNumber(snr_db) + "dB"; }

std::string StimulusRelPath(Condition c, std::optional<double> snr_db, std::string_view utterance) {
  std::string dir(ConditionName(c));
  if (HasNoise(c)) {
    Require(snr_db.has_value(), "noisy condition needs an SNR");
    dir += "_" + SnrTag(*snr_db);
  }
  return "stimuli/" + dir + "/" + std::string(utterance) + ".wav";
}

std::string VideoRelPath(std::string_view utterance) { return "video/" + std::string(utterance) + ".mp4"; }

SessionPlan BuildSessionPlan(const std::vector<std::string>& test_ids, double snr_db, std::uint64_t seed,
                             const PlanShape& shape) {
  Require(std::find(kSessionSnrs.begin(), kSessionSnrs.end(), snr_db) != kSessionSnrs.end(),
          "SNR must be 1 or 4");
  Require(shape.practice_per_cell >= 0 && shape.formal_per_cell >= 1, "invalid plan shape");
  Require(std::set<std::string>(test_ids.begin(), test_ids.end()).size() == test_ids.size(),
          "duplicate utterance ids");
  const auto needed = static_cast<std::size_t>(shape.total());
  Require(test_ids.size() >= needed, "insufficient utterances: plan needs " + std::to_string(needed) +
                                         ", corpus has " + std::to_string(test_ids.size()));

  std::mt19937_64 rng(seed);
  std::vector<std::string> pool = test_ids;
  std::shuffle(pool.begin(), pool.end(), rng);

  SessionPlan plan;
  plan.seed = seed;
  plan.snr_db = snr_db;
  std::size_t next_utt = 0;
  for (bool practice : {true, false}) {
    const int per_cell = practice ? shape.practice_per_cell : shape.formal_per_cell;
    std::vector<std::pair<Condition, bool>> cells;
    for (Condition c : kAllConditions) {
      for (bool video : {false, true}) {
        for (int k = 0; k < per_cell; ++k) cells.emplace_back(c, video);
      }
    }
    std::shuffle(cells.begin(), cells.end(), rng);
    for (const auto& [condition, video] : cells) {
      TrialSpec t;
      t.index = static_cast<int>(plan.trials.size());
      t.utterance_id = pool[next_utt++];
      t.condition = condition;
      if (HasNoise(condition)) t.snr_db = snr_db;
      t.video = video;
      t.practice = practice;
      t.audio_path = StimulusRelPath(condition, t.snr_db, t.utterance_id);
      if (video) t.video_path = VideoRelPath(t.utterance_id);
      plan.trials.push_back(std::move(t));
    }
  }
  return plan;
}

std::string SessionPlan::ToJson() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["snr_db"] = snr_db;
  j["trials"] = nlohmann::json::array();
  for (const TrialSpec& t : trials) {
    nlohmann::json jt{{"index", t.index},
                      {"utterance", t.utterance_id},
                      {"condition", ConditionName(t.condition)},
                      {"video", t.video},
                      {"block", t.practice ? "practice" : "formal"},
                      {"audio", t.audio_path}};
    if (t.snr_db) jt["snr_db"] = *t.snr_db;
    if (!t.video_path.empty()) jt["video_file"] = t.video_path;
    j["trials"].push_back(std::move(jt));
  }
  return j.dump(2);
}

SessionPlan SessionPlan::FromJson(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    SessionPlan plan;
    plan.seed = j.at("seed").get<std::uint64_t>();
    plan.snr_db = j.at("snr_db").get<double>();
    for (const auto& jt : j.at("trials")) {
      TrialSpec t;
      t.index = jt.at("index").get<int>();
      t.utterance_id = jt.at("utterance").get<std::string>();
      t.condition = ParseCondition(jt.at("condition").get<std::string>());
      t.video = jt.at("video").get<bool>();
      t.practice = jt.at("block").get<std::string>() == "practice";
      t.audio_path = jt.at("audio").get<std::string>();
      if (jt.contains("snr_db")) t.snr_db = jt["snr_db"].get<double>();
      if (jt.contains("video_file")) t.video_path = jt["video_file"].get<std::string>();
      Require(t.snr_db.has_value() == HasNoise(t.condition), "trial SNR must be present iff condition is not Clean");
      plan.trials.push_back(std::move(t));
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed session plan: ") + e.what());
  }
}

std::string ManifestToCsv(const std::vector<ManifestRow>& rows) {
  std::string out = "utterance,condition,snr_db,scale,offset\n";
  for (const ManifestRow& r : rows) {
    out += CsvLine({r.utterance, std::string(ConditionName(r.condition)), FormatNumber(r.snr_db),
                    FormatNumber(r.scale), std::to_string(r.offset)});
  }
  return out;
}

void WriteManifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows) {
  WriteTextFile(path, ManifestToCsv(rows));
}

std::vector<ManifestRow> ReadManifest(const std::filesystem::path& path) {
  const std::vector<CsvRow> rows = ReadCsv(path);
  Require(!rows.empty(), "manifest " + path.string() + " is empty");
  const std::string ctx = "manifest " + path.string();
  const std::size_t cu = CsvColumn(rows[0], "utterance", ctx);
  const std::size_t cc = CsvColumn(rows[0], "condition", ctx);
  const std::size_t cs = CsvColumn(rows[0], "snr_db", ctx);
  const std::size_t cg = CsvColumn(rows[0], "scale", ctx);
  const std::size_t co = CsvColumn(rows[0], "offset", ctx);
  std::vector<ManifestRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const CsvRow& r = rows[i];
    Require(r.size() == rows[0].size(), ctx + ": row " + std::to_string(i) + " has the wrong field count");
    try {
      out.push_back({r[cu], ParseCondition(r[cc]), std::stod(r[cs]), std::stod(r[cg]),
                     static_cast<std::size_t>(std::stoull(r[co]))});
    } catch (const std::logic_error&) {
      throw Error(ctx + ": bad number on row " + std::to_string(i));
    }
  }
  return out;
}

std::vector<std::string> ReadIdList(const std::filesystem::path& path) {
  std::vector<std::string> ids;
  std::string text = ReadTextFile(path);
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
    const std::size_t first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] != '#') ids.push_back(line.substr(first));
    start = end + 1;
  }
  return ids;
}

void WriteIdList(const std::filesystem::path& path, const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) out += id + "\n";
  WriteTextFile(path, out);
}

}  // namespace cisimkit::corpus
