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

#ifndef CISIMKIT_SERVICE_SERVER_H_
#define CISIMKIT_SERVICE_SERVER_H_

#include <filesystem>
#include <memory>
#include <string>
#include <thread>

#include "cisimkit/service/session_store.h"

namespace httplib {
class Server;
}

namespace cisimkit::service {

struct ServerConfig {
  std::filesystem::path corpus_root;
  std::filesystem::path state_dir;
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  // Optional directory served at / (for a browser front end).
  std::filesystem::path static_dir;
  corpus::PlanShape shape;
};

// HTTP+JSON front of a SessionStore.
//
//   POST /api/sessions                        {snr_db, seed, participant} -> {id}
//   GET  /api/sessions/{id}                   status
//   GET  /api/sessions/{id}/trial             {index, total, block, video, media_url, [video_url], replay_available}
//   POST /api/sessions/{id}/trial/{n}/replay  {allowed, replay_available}
//   POST /api/sessions/{id}/trial/{n}/response {score} -> {reference_text, next_index, finished}
//   GET  /api/sessions/{id}/export.csv
//   GET  /media/{id}/{opaque name}
//
// Errors are {code, message} with a 4xx/5xx status.
class ExperimentServer {
 public:
  explicit ExperimentServer(const ServerConfig& cfg);
  ~ExperimentServer();

  // Binds and serves on a background thread; returns the bound port.
  int Start();
  // Binds and serves on the calling thread until Stop().
  void Run();
  void Stop();
  int port() const { return port_; }
  SessionStore& store() { return *store_; }

 private:
  void Bind();

  ServerConfig cfg_;
  std::unique_ptr<SessionStore> store_;
  std::unique_ptr<httplib::Server> http_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace cisimkit::service

#endif  // CISIMKIT_SERVICE_SERVER_H_
