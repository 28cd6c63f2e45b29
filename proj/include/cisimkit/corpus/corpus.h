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

#ifndef CISIMKIT_CORPUS_CORPUS_H_
#define CISIMKIT_CORPUS_CORPUS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cisimkit/dsp/audio.h"

namespace cisimkit::corpus {

// The five listening conditions. E and S suffixes name the masker (engine,
// street); FCN conditions are the enhanced versions of the Noisy ones.
enum class Condition { kClean, kFcnE, kFcnS, kNoisyE, kNoisyS };

inline constexpr std::array<Condition, 5> kAllConditions{
    Condition::kClean, Condition::kFcnE, Condition::kFcnS, Condition::kNoisyE, Condition::kNoisyS};

// SNR groups used by the listening experiment.
inline constexpr std::array<double, 2> kSessionSnrs{1.0, 4.0};

std::string_view ConditionName(Condition c);  // "Clean", "FCN_E", ...
// Throws Error for anything but the five names.
Condition ParseCondition(std::string_view name);
bool IsEnhanced(Condition c);
bool HasNoise(Condition c);

struct MixResult {
  dsp::AudioBuffer noisy;
  double scale = 0.0;
  std::size_t offset = 0;  // start of the noise segment, in samples
};

// speech + scale * noise[offset ...], with the noise read circularly from a
// seeded random offset and the scale chosen so that the RMS ratio of speech
// to the scaled segment equals snr_db exactly (whole-utterance RMS).
MixResult MixAtSnr(const dsp::AudioBuffer& speech, const dsp::AudioBuffer& noise, double snr_db,
                   std::uint64_t seed);

// The circular noise segment of the given length starting at offset.
std::vector<double> NoiseSegment(const dsp::AudioBuffer& noise, std::size_t offset, std::size_t length);

struct CorpusSplit {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::uint64_t seed = 0;
};

// Uniform random disjoint split drawn from a seeded shuffle of the ids.
CorpusSplit SplitCorpus(const std::vector<std::string>& ids, std::uint64_t seed,
                        std::size_t n_train = 200, std::size_t n_test = 120);

struct TrialSpec {
  int index = 0;
  std::string utterance_id;
  Condition condition = Condition::kClean;
  std::optional<double> snr_db;  // absent exactly for Clean
  bool video = false;
  bool practice = false;
  std::string audio_path;  // relative to the corpus root
  std::string video_path;  // empty for audio-only trials
};

struct PlanShape {
  int practice_per_cell = 2;
  int formal_per_cell = 10;
  int num_cells() const { return static_cast<int>(kAllConditions.size()) * 2; }
  int total() const { return (practice_per_cell + formal_per_cell) * num_cells(); }
};

struct SessionPlan {
  std::uint64_t seed = 0;
  double snr_db = 0.0;
  std::vector<TrialSpec> trials;  // practice block first, then formal

  std::string ToJson() const;
  static SessionPlan FromJson(const std::string& text);
};

// Each block holds per_cell trials of every (condition x video) cell in
// shuffled order; utterances are drawn without replacement across the whole
// session. snr_db must be one of kSessionSnrs.
SessionPlan BuildSessionPlan(const std::vector<std::string>& test_ids, double snr_db, std::uint64_t seed,
                             const PlanShape& shape = {});

// Corpus layout, relative to a root directory:
//   stimuli/<Condition>[_<snr>dB]/<utterance>.wav
//   video/<utterance>.mp4
std::string StimulusRelPath(Condition c, std::optional<double> snr_db, std::string_view utterance);
std::string VideoRelPath(std::string_view utterance);
std::string SnrTag(double snr_db);  // "1dB", "-2.5dB"

// Manifest of mixed stimuli: utterance,condition,snr_db,scale,offset.
struct ManifestRow {
  std::string utterance;
  Condition condition = Condition::kNoisyE;
  double snr_db = 0.0;
  double scale = 0.0;
  std::size_t offset = 0;
};

std::string ManifestToCsv(const std::vector<ManifestRow>& rows);
void WriteManifest(const std::filesystem::path& path, const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> ReadManifest(const std::filesystem::path& path);

// One id per line; blank lines and '#' comments are skipped.
std::vector<std::string> ReadIdList(const std::filesystem::path& path);
void WriteIdList(const std::filesystem::path& path, const std::vector<std::string>& ids);

}  // namespace cisimkit::corpus

#endif  // CISIMKIT_CORPUS_CORPUS_H_
