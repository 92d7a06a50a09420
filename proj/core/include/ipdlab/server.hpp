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

#ifndef IPDLAB_SERVER_HPP_
#define IPDLAB_SERVER_HPP_

#include <memory>
#include <optional>
#include <string>

#include "ipdlab/session.hpp"

namespace httplib {
class Server;
}

namespace ipdlab {

// HTTP + JSON front end over a SessionManager.
//
//   POST /sessions                {"condition": "randomize" | "strategy/expression"
//                                  | {"strategy": ..., "expression": ...}, "seed": n?}
//   GET  /sessions/{id}
//   POST /sessions/{id}/choice    {"action": "C" | "D" | "project green" | "project blue"}
//   POST /sessions/{id}/feeling   {"feeling": "joy" | ...}
//   GET  /sessions/{id}/export    JSONL; ?partial=true for unfinished sessions
//
// Errors are {"code", "message", "phase"}.
class SessionServer {
 public:
  explicit SessionServer(SessionManager& manager,
                         std::optional<std::string> static_dir = std::nullopt);
  ~SessionServer();
  SessionServer(const SessionServer&) = delete;
  SessionServer& operator=(const SessionServer&) = delete;

  // Blocking.
  bool listen(const std::string& host, int port);
  // Returns the bound port, or -1.
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  bool is_running() const;
  void wait_until_ready() const;

 private:
  SessionManager& manager_;
  std::unique_ptr<httplib::Server> server_;
};

int http_status(ErrorCode code);

}  // namespace ipdlab

#endif  // IPDLAB_SERVER_HPP_
