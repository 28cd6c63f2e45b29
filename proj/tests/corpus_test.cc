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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

#include "cisimkit/corpus/corpus.h"
#include "cisimkit/corpus/synthetic.h"
#include "cisimkit/csv.h"
#include "cisimkit/error.h"
#include "test_util.h"

namespace cisimkit::corpus {
namespace {

using dsp::AudioBuffer;

std::vector<std::string> Ids(int n) {
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "u%03d", i);
    ids.emplace_back(buf);
  }
  return ids;
}

double AchievedSnr(const AudioBuffer& speech, const MixResult& m, const AudioBuffer& noise) {
  std::vector<double> scaled = NoiseSegment(noise, m.offset, speech.size());
  for (double& v : scaled) v *= m.scale;
  const double ps = dsp::Rms(speech), pn = dsp::Rms(scaled);
  return 10.0 * std::log10(ps * ps / (pn * pn));
}

TEST(Condition, NamesRoundTrip) {
  std::set<std::string> names;
  for (Condition c : kAllConditions) {
    names.insert(std::string(ConditionName(c)));
    EXPECT_EQ(ParseCondition(ConditionName(c)), c);
  }
  EXPECT_EQ(names, (std::set<std::string>{"Clean", "FCN_E", "FCN_S", "Noisy_E", "Noisy_S"}));
  EXPECT_THROW(ParseCondition("noisy_e"), Error);
  EXPECT_FALSE(HasNoise(Condition::kClean));
  EXPECT_TRUE(IsEnhanced(Condition::kFcnS));
  EXPECT_FALSE(IsEnhanced(Condition::kNoisyS));
}

TEST(MixAtSnr, ClosedFormScales) {
  // Equal-RMS signals: a constant-power noise file makes every segment's RMS
  // equal to the whole file's.
  const AudioBuffer speech = testing::Sine(440, 1.0, 16000, std::sqrt(2.0) * 0.1);
  const AudioBuffer noise = testing::Sine(1000, 0.5, 16000, std::sqrt(2.0) * 0.1);
  EXPECT_NEAR(MixAtSnr(speech, noise, 0.0, 1).scale, 1.0, 1e-6);
  EXPECT_NEAR(MixAtSnr(speech, noise, 1.0, 1).scale, 0.891251, 1e-6);
  EXPECT_NEAR(MixAtSnr(speech, noise, 4.0, 1).scale, std::pow(10.0, -4.0 / 20.0), 1e-6);
}

TEST(MixAtSnr, AchievedSnrExactAcrossGrid) {
  std::mt19937_64 rng(11);
  for (int snr = -10; snr <= 20; ++snr) {
    const AudioBuffer speech = SyntheticUtterance(rng(), 1.0);
    const AudioBuffer noise = (snr % 2) ? EngineNoise(rng(), 0.7) : StreetNoise(rng(), 2.0);
    const MixResult m = MixAtSnr(speech, noise, snr, rng());
    EXPECT_GT(m.scale, 0.0);
    EXPECT_LT(m.offset, noise.size());
    EXPECT_NEAR(AchievedSnr(speech, m, noise), snr, 1e-6);
    // noisy - speech is exactly the scaled segment.
    const std::vector<double> seg = NoiseSegment(noise, m.offset, speech.size());
    for (std::size_t i = 0; i < speech.size(); i += 97) {
      EXPECT_NEAR(m.noisy.samples[i] - speech.samples[i], m.scale * seg[i], 1e-12);
    }
  }
}

TEST(MixAtSnr, ShortNoiseWrapsAround) {
  const AudioBuffer speech = testing::WhiteNoise(1.0, 16000, 0.1, 1);
  const AudioBuffer noise({1.0, -1.0, 2.0}, 16000);
  const MixResult m = MixAtSnr(speech, noise, 3.0, 5);
  EXPECT_EQ(m.noisy.size(), speech.size());
  const std::vector<double> seg = NoiseSegment(noise, m.offset, 7);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(seg[i], noise.samples[(m.offset + i) % 3]);
  EXPECT_NEAR(AchievedSnr(speech, m, noise), 3.0, 1e-6);
}

TEST(MixAtSnr, DeterministicUnderSeed) {
  const AudioBuffer speech = SyntheticUtterance(1, 1.0);
  const AudioBuffer noise = StreetNoise(2, 3.0);
  const MixResult a = MixAtSnr(speech, noise, 1.0, 99);
  const MixResult b = MixAtSnr(speech, noise, 1.0, 99);
  EXPECT_EQ(a.offset, b.offset);
  EXPECT_EQ(a.noisy.samples, b.noisy.samples);
  EXPECT_NE(a.offset, MixAtSnr(speech, noise, 1.0, 100).offset);
}

TEST(MixAtSnr, Errors) {
  const AudioBuffer silent(std::vector<double>(100, 0.0), 16000);
  const AudioBuffer noise = testing::WhiteNoise(0.1, 16000, 0.1, 1);
  EXPECT_THROW(MixAtSnr(silent, noise, 1.0, 1), Error);
  EXPECT_THROW(MixAtSnr(noise, AudioBuffer({}, 16000), 1.0, 1), Error);
  EXPECT_THROW(MixAtSnr(noise, testing::WhiteNoise(0.1, 8000, 0.1, 1), 1.0, 1), Error);
}

TEST(SplitCorpus, DefaultSizesAreDisjointAndCover) {
  const auto ids = Ids(320);
  const CorpusSplit s = SplitCorpus(ids, 7);
  EXPECT_EQ(s.train_ids.size(), 200u);
  EXPECT_EQ(s.test_ids.size(), 120u);
  std::set<std::string> all(s.train_ids.begin(), s.train_ids.end());
  for (const auto& id : s.test_ids) EXPECT_TRUE(all.insert(id).second) << id << " in both sets";
  EXPECT_EQ(all, std::set<std::string>(ids.begin(), ids.end()));
}

TEST(SplitCorpus, DeterministicAndSeedSensitive) {
  const auto ids = Ids(320);
  EXPECT_EQ(SplitCorpus(ids, 3).train_ids, SplitCorpus(ids, 3).train_ids);
  EXPECT_NE(SplitCorpus(ids, 3).train_ids, SplitCorpus(ids, 4).train_ids);
}

TEST(SplitCorpus, SmallPartition) {
  const auto ids = Ids(10);
  const CorpusSplit s = SplitCorpus(ids, 1, 6, 4);
  std::multiset<std::string> seen(s.train_ids.begin(), s.train_ids.end());
  seen.insert(s.test_ids.begin(), s.test_ids.end());
  for (const auto& id : ids) EXPECT_EQ(seen.count(id), 1u);
  EXPECT_THROW(SplitCorpus(Ids(1), 1, 1, 0), Error);
  EXPECT_THROW(SplitCorpus(ids, 1, 8, 4), Error);
  EXPECT_THROW(SplitCorpus({"a", "a", "b"}, 1, 1, 1), Error);
}

TEST(SessionPlan, DefaultPlanIsBalanced) {
  const SessionPlan plan = BuildSessionPlan(Ids(120), 1.0, 42);
  ASSERT_EQ(plan.trials.size(), 120u);
  std::map<std::pair<Condition, bool>, int> practice, formal;
  std::set<std::string> utterances;
  for (std::size_t i = 0; i < plan.trials.size(); ++i) {
    const TrialSpec& t = plan.trials[i];
    EXPECT_EQ(t.index, static_cast<int>(i));
    EXPECT_EQ(t.practice, i < 20);
    (t.practice ? practice : formal)[{t.condition, t.video}]++;
    EXPECT_TRUE(utterances.insert(t.utterance_id).second) << "repeated " << t.utterance_id;
    EXPECT_EQ(t.snr_db.has_value(), t.condition != Condition::kClean);
    EXPECT_EQ(t.video, !t.video_path.empty());
  }
  ASSERT_EQ(formal.size(), 10u);
  for (const auto& [cell, n] : formal) EXPECT_EQ(n, 10);
  ASSERT_EQ(practice.size(), 10u);
  for (const auto& [cell, n] : practice) EXPECT_EQ(n, 2);
}

TEST(SessionPlan, SeedControlsOrder) {
  const auto ids = Ids(120);
  const SessionPlan a = BuildSessionPlan(ids, 4.0, 5);
  const SessionPlan b = BuildSessionPlan(ids, 4.0, 5);
  const SessionPlan c = BuildSessionPlan(ids, 4.0, 6);
  EXPECT_EQ(a.ToJson(), b.ToJson());
  EXPECT_NE(a.ToJson(), c.ToJson());
}

TEST(SessionPlan, PathsFollowCorpusLayout) {
  const SessionPlan plan = BuildSessionPlan(Ids(120), 4.0, 1);
  for (const TrialSpec& t : plan.trials) {
    if (t.condition == Condition::kClean) {
      EXPECT_EQ(t.audio_path, "stimuli/Clean/" + t.utterance_id + ".wav");
    } else {
      EXPECT_EQ(t.audio_path, "stimuli/" + std::string(ConditionName(t.condition)) + "_4dB/" + t.utterance_id + ".wav");
    }
    if (t.video) EXPECT_EQ(t.video_path, "video/" + t.utterance_id + ".mp4");
  }
}

TEST(SessionPlan, Errors) {
  EXPECT_THROW(BuildSessionPlan(Ids(119), 1.0, 1), Error);
  try {
    BuildSessionPlan(Ids(120), 3.0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "SNR must be 1 or 4");
  }
  PlanShape small{0, 1};
  EXPECT_EQ(BuildSessionPlan(Ids(10), 1.0, 1, small).trials.size(), 10u);
}

TEST(SessionPlan, JsonRoundTrip) {
  const SessionPlan plan = BuildSessionPlan(Ids(130), 1.0, 77);
  const SessionPlan back = SessionPlan::FromJson(plan.ToJson());
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(back.snr_db, 1.0);
  ASSERT_EQ(back.trials.size(), plan.trials.size());
  for (std::size_t i = 0; i < plan.trials.size(); ++i) {
    EXPECT_EQ(back.trials[i].utterance_id, plan.trials[i].utterance_id);
    EXPECT_EQ(back.trials[i].condition, plan.trials[i].condition);
    EXPECT_EQ(back.trials[i].snr_db, plan.trials[i].snr_db);
    EXPECT_EQ(back.trials[i].video, plan.trials[i].video);
    EXPECT_EQ(back.trials[i].practice, plan.trials[i].practice);
    EXPECT_EQ(back.trials[i].audio_path, plan.trials[i].audio_path);
    EXPECT_EQ(back.trials[i].video_path, plan.trials[i].video_path);
  }
  EXPECT_NE(plan.ToJson().find("\"condition\": \"FCN_S\""), std::string::npos);
  EXPECT_THROW(SessionPlan::FromJson("{\"seed\": 1}"), Error);
}

TEST(Manifest, RoundTrip) {
  const auto dir = testing::ScratchDir("manifest");
  const std::vector<ManifestRow> rows{{"u001", Condition::kNoisyE, 1.0, 0.891251, 1234},
                                      {"u,002", Condition::kNoisyS, 4.0, 0.25, 0}};
  WriteManifest(dir / "m.csv", rows);
  EXPECT_EQ(ReadTextFile(dir / "m.csv").substr(0, 40), "utterance,condition,snr_db,scale,offset\n");
  const auto back = ReadManifest(dir / "m.csv");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].utterance, "u,002");
  EXPECT_EQ(back[0].scale, 0.891251);
  EXPECT_EQ(back[0].offset, 1234u);
  EXPECT_EQ(back[1].condition, Condition::kNoisyS);
}

TEST(IdList, SkipsBlankAndComments) {
  const auto dir = testing::ScratchDir("idlist");
  WriteTextFile(dir / "ids.txt", "# header\nu1\n\n  u2  \r\nu3");
  EXPECT_EQ(ReadIdList(dir / "ids.txt"), (std::vector<std::string>{"u1", "u2", "u3"}));
}

TEST(Csv, QuotedFieldsAndRoundTrip) {
  const auto rows = ParseCsv("a,b\n\"x, y\",\"he said \"\"hi\"\"\"\r\n,\n");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1], (CsvRow{"x, y", "he said \"hi\""}));
  EXPECT_EQ(rows[2], (CsvRow{"", ""}));
  EXPECT_EQ(ParseCsv(CsvLine(rows[1]))[0], rows[1]);
  EXPECT_THROW(ParseCsv("\"open"), Error);
}

// Mean absolute deviation of 50 ms frame levels in dB: a crude
// stationarity index.
double LevelSpreadDb(const AudioBuffer& x) {
  const std::size_t frame = 800;
  std::vector<double> levels;
  for (std::size_t s = 0; s + frame <= x.size(); s += frame) {
    double e = 0;
    for (std::size_t i = s; i < s + frame; ++i) e += x.samples[i] * x.samples[i];
    levels.push_back(10.0 * std::log10(e / frame + 1e-12));
  }
  double mean = 0;
  for (double l : levels) mean += l;
  mean /= levels.size();
  double dev = 0;
  for (double l : levels) dev += std::abs(l - mean);
  return dev / levels.size();
}

TEST(Synthetic, DeterministicWithRequestedLevel) {
  const AudioBuffer a = SyntheticUtterance(9, 1.5, 16000, 0.07);
  EXPECT_EQ(a.size(), 24000u);
  EXPECT_NEAR(dsp::Rms(a), 0.07, 1e-12);
  EXPECT_EQ(a.samples, SyntheticUtterance(9, 1.5, 16000, 0.07).samples);
  EXPECT_NE(a.samples, SyntheticUtterance(10, 1.5, 16000, 0.07).samples);
}

TEST(Synthetic, StreetNoiseIsLessStationaryThanEngine) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double engine = LevelSpreadDb(EngineNoise(seed, 4.0));
    const double street = LevelSpreadDb(StreetNoise(seed, 4.0));
    EXPECT_LT(engine, 1.0) << "seed " << seed;
    EXPECT_GT(street, 2.0 * engine) << "seed " << seed;
  }
}

}  // namespace
}  // namespace cisimkit::corpus
