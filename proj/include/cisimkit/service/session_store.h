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

#ifndef CISIMKIT_SERVICE_SESSION_STORE_H_
#define CISIMKIT_SERVICE_SESSION_STORE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cisimkit/corpus/corpus.h"

namespace cisimkit::service {

// Failure of a service operation, carrying the HTTP status and a stable
// machine-readable code for the {code, message} error body.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

// Read-only view of a corpus prepared for listening tests:
//   <root>/test_ids.txt          utterance ids, one per line
//   <root>/transcripts.csv       utterance,text
//   <root>/stimuli/...           see corpus::StimulusRelPath
//   <root>/video/<utt>.mp4       needed for video trials
class StimulusCorpus {
 public:
  explicit StimulusCorpus(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  const std::vector<std::string>& test_ids() const { return test_ids_; }
  // Empty string when the utterance has no transcript line.
  std::string Transcript(const std::string& utterance) const;

 private:
  std::filesystem::path root_;
  std::vector<std::string> test_ids_;
  std::map<std::string, std::string> transcripts_;
};

enum class SessionState { kCreated, kRunning, kFinished };
std::string StateName(SessionState s);

// What the participant's browser may see about the current trial. Carries
// no condition label and no transcript.
struct TrialView {
  int index = 0;
  int total = 0;
  std::string block;  // "practice" or "formal"
  bool video = false;
  std::string media_url;
  std::string video_url;  // empty for audio-only trials
  bool replay_available = true;
};

struct ReplayDecision {
  bool allowed = false;
};

struct ResponseReceipt {
  std::string reference_text;
  int next_index = 0;
  bool finished = false;
};

struct SessionStatus {
  std::string id;
  std::string participant;
  double snr_db = 0.0;
  SessionState state = SessionState::kCreated;
  int cursor = 0;
  int total = 0;
};

// All sessions, each backed by an append-only JSON-lines event log in
// `state_dir`. Every event is written and flushed to disk before the call
// returns, and state is rebuilt from the logs on construction, so a crash
// never loses an acknowledged response. Calls on one session are
// serialized; different sessions proceed independently.
class SessionStore {
 public:
  SessionStore(std::shared_ptr<const StimulusCorpus> corpus, std::filesystem::path state_dir,
               corpus::PlanShape shape = {});
  ~SessionStore();
  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  std::string CreateSession(double snr_db, std::uint64_t seed, const std::string& participant);
  TrialView NextTrial(const std::string& id);
  ReplayDecision RequestReplay(const std::string& id, int trial);
  ResponseReceipt SubmitResponse(const std::string& id, int trial, int score);
  // participant,snr_db,trial,condition,video,score,replay_used,timestamp
  std::string ExportCsv(const std::string& id);
  SessionStatus Status(const std::string& id);
  std::vector<std::string> SessionIds();

  // File behind an opaque media name of a session, if any.
  std::optional<std::filesystem::path> ResolveMedia(const std::string& id, const std::string& name);

 private:
  struct Session;
  Session& Find(const std::string& id);
  void Load(const std::filesystem::path& log);

  std::shared_ptr<const StimulusCorpus> corpus_;
  std::filesystem::path state_dir_;
  corpus::PlanShape shape_;
  std::mutex map_mutex_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
};

}  // namespace cisimkit::service

#endif  // CISIMKIT_SERVICE_SESSION_STORE_H_
