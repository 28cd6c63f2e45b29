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

#include "cisimkit/service/session_store.h"

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <json.hpp>
#include <random>

#include "cisimkit/csv.h"
#include "cisimkit/error.h"
#include "cisimkit/stats/table.h"

namespace cisimkit::service {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

ServiceError BadRequest(const std::string& code, const std::string& message) { return {400, code, message}; }
ServiceError Conflict(const std::string& code, const std::string& message) { return {409, code, message}; }

std::string RandomHex(std::size_t chars) {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(chars, '0');
  for (char& c : s) c = kDigits[rng() & 15];
  return s;
}

std::string UtcNow() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char date[32];
  std::strftime(date, sizeof(date), "%Y-%m-%dT%H:%M:%S", &tm);
  char frac[8];
  std::snprintf(frac, sizeof(frac), ".%03dZ", static_cast<int>(ms));
  return std::string(date) + frac;
}

void WriteAll(int fd, const std::string& data, const fs::path& path) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) throw std::runtime_error("write failed on " + path.string());
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) throw std::runtime_error("fsync failed on " + path.string());
}

void SyncDirectory(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd >= 0) {
    ::fsync(fd);
    ::close(fd);
  }
}

bool IsSafeToken(const std::string& s) {
  if (s.empty() || s.size() > 64) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

StimulusCorpus::StimulusCorpus(fs::path root) : root_(std::move(root)) {
  Require(fs::is_directory(root_), "corpus root " + root_.string() + " is not a directory");
  test_ids_ = corpus::ReadIdList(root_ / "test_ids.txt");
  const std::vector<CsvRow> rows = ReadCsv(root_ / "transcripts.csv");
  Require(!rows.empty(), "transcripts.csv is empty");
  const std::size_t utt = CsvColumn(rows[0], "utterance", "transcripts.csv");
  const std::size_t text = CsvColumn(rows[0], "text", "transcripts.csv");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() == 1 && rows[i][0].empty()) continue;
    Require(rows[i].size() == rows[0].size(), "transcripts.csv line " + std::to_string(i + 1) + " is malformed");
    transcripts_[rows[i][utt]] = rows[i][text];
  }
}

std::string StimulusCorpus::Transcript(const std::string& utterance) const {
  const auto it = transcripts_.find(utterance);
  return it == transcripts_.end() ? std::string() : it->second;
}

std::string StateName(SessionState s) {
  switch (s) {
    case SessionState::kCreated: return "created";
    case SessionState::kRunning: return "running";
    case SessionState::kFinished: return "finished";
  }
  return "unknown";
}

struct SessionStore::Session {
  std::mutex mutex;
  std::string id;
  std::string participant;
  corpus::SessionPlan plan;
  std::vector<std::string> media_tokens;  // per trial
  std::vector<std::string> video_tokens;  // per trial, empty when no video
  int cursor = 0;
  bool current_replayed = false;
  std::vector<stats::ResultRow> responses;
  fs::path log_path;
  int fd = -1;

  ~Session() {
    if (fd >= 0) ::close(fd);
  }

  int total() const { return static_cast<int>(plan.trials.size()); }
  SessionState state() const {
    if (cursor >= total()) return SessionState::kFinished;
    return cursor > 0 || current_replayed ? SessionState::kRunning : SessionState::kCreated;
  }

  void Append(const json& event) {
    if (fd < 0) {
      fd = ::open(log_path.c_str(), O_WRONLY | O_APPEND | O_CLOEXEC);
      if (fd < 0) throw std::runtime_error("cannot open event log " + log_path.string());
    }
    WriteAll(fd, event.dump() + "\n", log_path);
  }

  // State transitions shared by live requests and log replay.
  void CheckCurrent(int trial) const {
    if (cursor >= total()) throw Conflict("session_finished", "session finished");
    if (trial < cursor) throw Conflict("stale_trial", "stale trial: trial " + std::to_string(trial) + " already answered");
    if (trial != cursor) {
      throw Conflict("trial_not_current", "trial not current: trial " + std::to_string(trial) + " requested, current is " +
                                              std::to_string(cursor));
    }
  }

  void ApplyReplay() { current_replayed = true; }

  void ApplyResponse(int score, const std::string& timestamp) {
    const corpus::TrialSpec& t = plan.trials[cursor];
    stats::ResultRow row;
    row.participant = participant;
    row.snr_db = plan.snr_db;
    row.trial = t.index;
    row.condition = std::string(corpus::ConditionName(t.condition));
    row.video = t.video;
    row.score = score;
    row.replay_used = current_replayed;
    row.timestamp = timestamp;
    responses.push_back(std::move(row));
    ++cursor;
    current_replayed = false;
  }
};

SessionStore::SessionStore(std::shared_ptr<const StimulusCorpus> corpus, fs::path state_dir, corpus::PlanShape shape)
    : corpus_(std::move(corpus)), state_dir_(std::move(state_dir)), shape_(shape) {
  fs::create_directories(state_dir_ / "sessions");
  for (const auto& entry : fs::directory_iterator(state_dir_ / "sessions")) {
    if (entry.path().extension() == ".jsonl") Load(entry.path());
  }
}

SessionStore::~SessionStore() = default;

void SessionStore::Load(const fs::path& log) {
  std::string text = ReadTextFile(log);
  // A torn final write has no newline; it was never acknowledged, so drop it
  // and cut the file back so later appends start on a clean line.
  const std::size_t complete = text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1;
  if (complete != text.size()) {
    text.resize(complete);
    fs::resize_file(log, complete);
  }
  auto s = std::make_unique<Session>();
  s->log_path = log;
  std::size_t line_no = 0, start = 0;
  try {
    while (start < text.size()) {
      const std::size_t end = text.find('\n', start);
      const json ev = json::parse(text.substr(start, end - start));
      start = end + 1;
      ++line_no;
      const std::string type = ev.at("type").get<std::string>();
      if (line_no == 1) {
        Require(type == "created", "first event is not 'created'");
        s->id = ev.at("id").get<std::string>();
        s->participant = ev.at("participant").get<std::string>();
        s->plan = corpus::SessionPlan::FromJson(ev.at("plan").dump());
        s->media_tokens = ev.at("media").get<std::vector<std::string>>();
        s->video_tokens = ev.at("video_media").get<std::vector<std::string>>();
        Require(s->media_tokens.size() == s->plan.trials.size() && s->video_tokens.size() == s->plan.trials.size(),
                "media table does not match the plan");
        continue;
      }
      const int trial = ev.at("trial").get<int>();
      s->CheckCurrent(trial);
      if (type == "replay") {
        Require(!s->current_replayed, "two replays logged for trial " + std::to_string(trial));
        s->ApplyReplay();
      } else if (type == "response") {
        s->ApplyResponse(ev.at("score").get<int>(), ev.at("time").get<std::string>());
      } else {
        throw Error("unknown event type '" + type + "'");
      }
    }
  } catch (const std::exception& e) {
    throw Error("corrupt session log " + log.string() + " at event " + std::to_string(line_no) + ": " + e.what());
  }
  if (line_no == 0) return;  // creation never completed
  Require(s->id == log.stem().string(), "session log " + log.string() + " names a different session");
  sessions_[s->id] = std::move(s);
}

SessionStore::Session& SessionStore::Find(const std::string& id) {
  std::lock_guard<std::mutex> lock(map_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw ServiceError(404, "not_found", "no session '" + id + "'");
  return *it->second;
}

std::string SessionStore::CreateSession(double snr_db, std::uint64_t seed, const std::string& participant) {
  if (participant.empty() || participant.size() > 200) {
    throw BadRequest("invalid_participant", "participant label must be 1-200 characters");
  }
  corpus::SessionPlan plan;
  try {
    plan = corpus::BuildSessionPlan(corpus_->test_ids(), snr_db, seed, shape_);
  } catch (const Error& e) {
    throw BadRequest("invalid_session", e.what());
  }
  std::vector<std::string> missing;
  for (const corpus::TrialSpec& t : plan.trials) {
    if (!fs::is_regular_file(corpus_->root() / t.audio_path)) missing.push_back(t.audio_path);
    if (t.video && !fs::is_regular_file(corpus_->root() / t.video_path)) missing.push_back(t.video_path);
  }
  if (!missing.empty()) {
    throw ServiceError(500, "media_missing", "corpus media missing: " + missing.front() + " (and " +
                                                 std::to_string(missing.size() - 1) + " more)");
  }

  auto s = std::make_unique<Session>();
  s->participant = participant;
  s->plan = std::move(plan);
  for (const corpus::TrialSpec& t : s->plan.trials) {
    s->media_tokens.push_back(RandomHex(20));
    s->video_tokens.push_back(t.video ? RandomHex(20) : "");
  }
  json created{{"type", "created"},
               {"participant", participant},
               {"plan", json::parse(s->plan.ToJson())},
               {"media", s->media_tokens},
               {"video_media", s->video_tokens},
               {"time", UtcNow()}};

  std::lock_guard<std::mutex> lock(map_mutex_);
  do {
    s->id = RandomHex(16);
  } while (sessions_.count(s->id));
  created["id"] = s->id;
  const fs::path dir = state_dir_ / "sessions";
  s->log_path = dir / (s->id + ".jsonl");
  const fs::path tmp = dir / (s->id + ".jsonl.tmp");
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw std::runtime_error("cannot create " + tmp.string());
  try {
    WriteAll(fd, created.dump() + "\n", tmp);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
  fs::rename(tmp, s->log_path);
  SyncDirectory(dir);
  const std::string id = s->id;
  sessions_[id] = std::move(s);
  return id;
}

TrialView SessionStore::NextTrial(const std::string& id) {
  Session& s = Find(id);
  std::lock_guard<std::mutex> lock(s.mutex);
  if (s.cursor >= s.total()) throw Conflict("session_finished", "session finished");
  const corpus::TrialSpec& t = s.plan.trials[s.cursor];
  TrialView v;
  v.index = s.cursor;
  v.total = s.total();
  v.block = t.practice ? "practice" : "formal";
  v.video = t.video;
  v.media_url = "/media/" + s.id + "/" + s.media_tokens[s.cursor] + ".wav";
  if (t.video) v.video_url = "/media/" + s.id + "/" + s.video_tokens[s.cursor] + fs::path(t.video_path).extension().string();
  v.replay_available = !s.current_replayed;
  return v;
}

ReplayDecision SessionStore::RequestReplay(const std::string& id, int trial) {
  Session& s = Find(id);
  std::lock_guard<std::mutex> lock(s.mutex);
  s.CheckCurrent(trial);
  if (s.current_replayed) return {false};
  s.Append({{"type", "replay"}, {"trial", trial}, {"time", UtcNow()}});
  s.ApplyReplay();
  return {true};
}

ResponseReceipt SessionStore::SubmitResponse(const std::string& id, int trial, int score) {
  Session& s = Find(id);
  std::lock_guard<std::mutex> lock(s.mutex);
  if (score < 0 || score > 10) throw BadRequest("invalid_score", "score must be an integer from 0 to 10");
  s.CheckCurrent(trial);
  const std::string now = UtcNow();
  s.Append({{"type", "response"}, {"trial", trial}, {"score", score}, {"time", now}});
  const std::string utterance = s.plan.trials[s.cursor].utterance_id;
  s.ApplyResponse(score, now);
  return {corpus_->Transcript(utterance), s.cursor, s.cursor >= s.total()};
}

std::string SessionStore::ExportCsv(const std::string& id) {
  Session& s = Find(id);
  std::lock_guard<std::mutex> lock(s.mutex);
  std::string out = std::string(stats::kResultsHeader) + "\n";
  for (const stats::ResultRow& r : s.responses) out += stats::ResultRowCsv(r) + "\n";
  return out;
}

SessionStatus SessionStore::Status(const std::string& id) {
  Session& s = Find(id);
  std::lock_guard<std::mutex> lock(s.mutex);
  return {s.id, s.participant, s.plan.snr_db, s.state(), s.cursor, s.total()};
}

std::vector<std::string> SessionStore::SessionIds() {
  std::lock_guard<std::mutex> lock(map_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : sessions_) ids.push_back(id);
  return ids;
}

std::optional<fs::path> SessionStore::ResolveMedia(const std::string& id, const std::string& name) {
  if (!IsSafeToken(id)) return std::nullopt;
  Session* s = nullptr;
  try {
    s = &Find(id);
  } catch (const ServiceError&) {
    return std::nullopt;
  }
  const std::string token = fs::path(name).stem().string();
  if (!IsSafeToken(token)) return std::nullopt;
  std::lock_guard<std::mutex> lock(s->mutex);
  for (std::size_t i = 0; i < s->plan.trials.size(); ++i) {
    if (s->media_tokens[i] == token) return corpus_->root() / s->plan.trials[i].audio_path;
    if (!s->video_tokens[i].empty() && s->video_tokens[i] == token) return corpus_->root() / s->plan.trials[i].video_path;
  }
  return std::nullopt;
}

}  // namespace cisimkit::service
