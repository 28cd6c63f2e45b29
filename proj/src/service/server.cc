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

#include "cisimkit/service/server.h"

#include <httplib.h>

#include <json.hpp>

#include "cisimkit/csv.h"
#include "cisimkit/error.h"

namespace cisimkit::service {
namespace {

using nlohmann::json;

void SendJson(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void SendError(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  SendJson(res, status, {{"code", code}, {"message", message}});
}

json ParseBody(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw ServiceError(400, "invalid_json", "request body must be a JSON object");
  return body;
}

int TrialParam(const httplib::Request& req) {
  const std::string& s = req.matches[2];
  try {
    std::size_t used = 0;
    const int n = std::stoi(s, &used);
    if (used == s.size()) return n;
  } catch (const std::exception&) {
  }
  throw ServiceError(400, "invalid_trial", "trial index must be an integer");
}

std::string ContentType(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".wav") return "audio/wav";
  if (ext == ".mp4") return "video/mp4";
  if (ext == ".webm") return "video/webm";
  return "application/octet-stream";
}

// Runs a handler, mapping failures to {code, message} responses.
template <typename F>
httplib::Server::Handler Guard(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ServiceError& e) {
      SendError(res, e.status(), e.code(), e.what());
    } catch (const Error& e) {
      SendError(res, 400, "invalid_request", e.what());
    } catch (const json::exception& e) {
      SendError(res, 400, "invalid_json", e.what());
    } catch (const std::exception& e) {
      SendError(res, 500, "internal", e.what());
    }
  };
}

}  // namespace

ExperimentServer::ExperimentServer(const ServerConfig& cfg) : cfg_(cfg) {
  auto corpus = std::make_shared<const StimulusCorpus>(cfg_.corpus_root);
  store_ = std::make_unique<SessionStore>(std::move(corpus), cfg_.state_dir, cfg_.shape);
  http_ = std::make_unique<httplib::Server>();
  httplib::Server& s = *http_;

  s.Post("/api/sessions", Guard([this](const httplib::Request& req, httplib::Response& res) {
           const json body = ParseBody(req);
           if (!body.contains("snr_db") || !body["snr_db"].is_number()) {
             throw ServiceError(400, "invalid_session", "snr_db must be a number");
           }
           std::uint64_t seed = 0;
           if (body.contains("seed")) {
             if (!body["seed"].is_number_unsigned()) {
               throw ServiceError(400, "invalid_session", "seed must be a non-negative integer");
             }
             seed = body["seed"].get<std::uint64_t>();
           }
           if (!body.contains("participant") || !body["participant"].is_string()) {
             throw ServiceError(400, "invalid_participant", "participant must be a string");
           }
           const std::string id =
               store_->CreateSession(body["snr_db"].get<double>(), seed, body["participant"].get<std::string>());
           SendJson(res, 201, {{"id", id}});
         }));

  s.Get(R"(/api/sessions/([0-9a-f]+))", Guard([this](const httplib::Request& req, httplib::Response& res) {
          const SessionStatus st = store_->Status(req.matches[1]);
          SendJson(res, 200,
                   {{"id", st.id}, {"participant", st.participant}, {"snr_db", st.snr_db},
                    {"state", StateName(st.state)}, {"cursor", st.cursor}, {"total", st.total}});
        }));

  s.Get(R"(/api/sessions/([0-9a-f]+)/trial)", Guard([this](const httplib::Request& req, httplib::Response& res) {
          const TrialView v = store_->NextTrial(req.matches[1]);
          json body{{"index", v.index},     {"total", v.total},         {"block", v.block},
                    {"video", v.video},     {"media_url", v.media_url}, {"replay_available", v.replay_available}};
          if (!v.video_url.empty()) body["video_url"] = v.video_url;
          SendJson(res, 200, body);
        }));

  s.Post(R"(/api/sessions/([0-9a-f]+)/trial/(-?[0-9]+)/replay)",
         Guard([this](const httplib::Request& req, httplib::Response& res) {
           const ReplayDecision d = store_->RequestReplay(req.matches[1], TrialParam(req));
           SendJson(res, 200, {{"allowed", d.allowed}, {"replay_available", false}});
         }));

  s.Post(R"(/api/sessions/([0-9a-f]+)/trial/(-?[0-9]+)/response)",
         Guard([this](const httplib::Request& req, httplib::Response& res) {
           const json body = ParseBody(req);
           if (!body.contains("score") || !body["score"].is_number_integer()) {
             throw ServiceError(400, "invalid_score", "score must be an integer from 0 to 10");
           }
           const ResponseReceipt r = store_->SubmitResponse(req.matches[1], TrialParam(req), body["score"].get<int>());
           SendJson(res, 200, {{"accepted", true}, {"reference_text", r.reference_text},
                               {"next_index", r.next_index}, {"finished", r.finished}});
         }));

  s.Get(R"(/api/sessions/([0-9a-f]+)/export\.csv)", Guard([this](const httplib::Request& req, httplib::Response& res) {
          res.set_content(store_->ExportCsv(req.matches[1]), "text/csv; charset=utf-8");
        }));

  s.Get(R"(/media/([0-9a-f]+)/([0-9a-f]+\.[a-z0-9]+))", Guard([this](const httplib::Request& req, httplib::Response& res) {
          const auto path = store_->ResolveMedia(req.matches[1], req.matches[2]);
          if (!path) throw ServiceError(404, "not_found", "no such media");
          res.set_content(ReadTextFile(*path), ContentType(*path));
        }));

  if (!cfg_.static_dir.empty()) s.set_mount_point("/", cfg_.static_dir.string());

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) SendError(res, res.status, "not_found", "no such endpoint");
  });
}

ExperimentServer::~ExperimentServer() { Stop(); }

void ExperimentServer::Bind() {
  if (cfg_.port == 0) {
    port_ = http_->bind_to_any_port(cfg_.host);
  } else {
    port_ = http_->bind_to_port(cfg_.host, cfg_.port) ? cfg_.port : -1;
  }
  if (port_ <= 0) throw Error("cannot bind " + cfg_.host + ":" + std::to_string(cfg_.port));
}

int ExperimentServer::Start() {
  Bind();
  thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return port_;
}

void ExperimentServer::Run() {
  Bind();
  http_->listen_after_bind();
}

void ExperimentServer::Stop() {
  if (http_) http_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace cisimkit::service
