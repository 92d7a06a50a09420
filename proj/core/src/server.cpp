// Copyright 2026 The ipdlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ipdlab/server.hpp"

#include "httplib.h"

namespace ipdlab {
namespace {

using ojson = nlohmann::ordered_json;

void reply_json(httplib::Response& res, const ojson& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

Condition parse_condition_field(const nlohmann::json& c) {
  if (c.is_string()) return Condition::parse(c.get<std::string>());
  if (c.is_object()) {
    return {parse_strategy_kind(c.at("strategy").get<std::string>()),
            parse_expression_pattern(c.at("expression").get<std::string>())};
  }
  throw Error(ErrorCode::kInvalidArgument, "condition must be a string or object");
}

Action parse_choice(const std::string& s) {
  if (s == "C" || s == "D") return parse_action(s);
  return from_presentation_label(s);
}

nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("malformed JSON body: ") + e.what());
  }
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownSession: return 404;
    case ErrorCode::kOutOfOrderEvent:
    case ErrorCode::kSessionComplete:
    case ErrorCode::kSessionIncomplete:
    case ErrorCode::kSessionAbandoned: return 409;
    default: return 400;
  }
}

SessionServer::SessionServer(SessionManager& manager, std::optional<std::string> static_dir)
    : manager_(manager), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;

  // Wraps a handler; maps ipdlab errors to structured bodies.
  auto guarded = [this](auto handler) {
    return [this, handler](const httplib::Request& req, httplib::Response& res) {
      std::string id;
      if (!req.matches.empty() && req.matches.size() > 1) id = req.matches[1];
      auto fail = [&](ErrorCode code, const std::string& message) {
        ojson body{{"code", to_string(code)}, {"message", message}, {"phase", nullptr}};
        if (!id.empty()) {
          try {
            body["phase"] = to_string(manager_.phase_of(id));
          } catch (const Error&) {
          }
        }
        reply_json(res, body, http_status(code));
      };
      try {
        handler(req, res, id);
      } catch (const Error& e) {
        fail(e.code(), e.what());
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::kInvalidArgument, e.what());
      }
    };
  };

  srv.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res,
                                       const std::string&) {
    const nlohmann::json body = parse_body(req);
    std::optional<Condition> condition;
    if (body.contains("condition") && !(body.at("condition").is_string() &&
                                        body.at("condition").get<std::string>() == "randomize")) {
      condition = parse_condition_field(body.at("condition"));
    }
    std::optional<std::uint64_t> seed;
    if (body.contains("seed") && !body.at("seed").is_null()) {
      seed = body.at("seed").get<std::uint64_t>();
    }
    const CreatedSession created = manager_.create_session(condition, seed);
    reply_json(res, {{"session_id", created.session_id}, {"view", to_json(created.view)}}, 201);
  }));

  srv.Get(R"(/sessions/([0-9a-zA-Z_-]+))",
          guarded([this](const httplib::Request&, httplib::Response& res, const std::string& id) {
            reply_json(res, to_json(manager_.view(id)));
          }));

  srv.Post(R"(/sessions/([0-9a-zA-Z_-]+)/choice)",
           guarded([this](const httplib::Request& req, httplib::Response& res,
                          const std::string& id) {
             const nlohmann::json body = parse_body(req);
             const Action a = parse_choice(body.at("action").get<std::string>());
             reply_json(res, to_json(manager_.submit_choice(id, a)));
           }));

  srv.Post(R"(/sessions/([0-9a-zA-Z_-]+)/feeling)",
           guarded([this](const httplib::Request& req, httplib::Response& res,
                          const std::string& id) {
             const nlohmann::json body = parse_body(req);
             if (!body.contains("feeling") || !body.at("feeling").is_string()) {
               throw Error(ErrorCode::kInvalidFeeling, "body must carry a \"feeling\" string");
             }
             const ParticipantFeeling f = parse_feeling(body.at("feeling").get<std::string>());
             reply_json(res, to_json(manager_.submit_feeling(id, f)));
           }));

  srv.Get(R"(/sessions/([0-9a-zA-Z_-]+)/export)",
          guarded([this](const httplib::Request& req, httplib::Response& res,
                         const std::string& id) {
            const std::string partial = req.get_param_value("partial");
            const bool allow_partial = partial == "true" || partial == "1";
            std::string body;
            for (const RoundEvent& e : manager_.export_session(id, allow_partial)) {
              body += to_jsonl_line(e);
              body += '\n';
            }
            res.set_content(body, "application/x-ndjson");
          }));

  if (static_dir) srv.set_mount_point("/", *static_dir);
}

SessionServer::~SessionServer() = default;

bool SessionServer::listen(const std::string& host, int port) {
  return server_->listen(host, port);
}

int SessionServer::bind_to_any_port(const std::string& host) {
  return server_->bind_to_any_port(host);
}

bool SessionServer::listen_after_bind() { return server_->listen_after_bind(); }

void SessionServer::stop() { server_->stop(); }

bool SessionServer::is_running() const { return server_->is_running(); }

void SessionServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace ipdlab
