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

#ifndef IPDLAB_TESTS_SUPPORT_HTTP_FIXTURE_HPP_
#define IPDLAB_TESTS_SUPPORT_HTTP_FIXTURE_HPP_

#include <stdexcept>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "ipdlab/server.hpp"
#include "ipdlab/session.hpp"

namespace ipdlab::testing {

// A session server on an ephemeral loopback port.
class LiveServer {
 public:
  explicit LiveServer(ServiceConfig config = {}) : manager_(std::move(config)), server_(manager_) {
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("cannot bind loopback port");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LiveServer() {
    server_.stop();
    thread_.join();
  }

  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }
  SessionManager& manager() { return manager_; }
  int port() const { return port_; }

 private:
  SessionManager manager_;
  SessionServer server_;
  int port_ = -1;
  std::thread thread_;
};

struct Reply {
  int status = 0;
  nlohmann::json body;
  std::string raw;
};

inline Reply call(httplib::Client& c, const std::string& method, const std::string& path,
                  const nlohmann::json& body = nullptr) {
  httplib::Result r = method == "GET" ? c.Get(path)
                                      : c.Post(path, body.is_null() ? "" : body.dump(),
                                               "application/json");
  if (!r) throw std::runtime_error("request failed: " + method + " " + path);
  Reply out;
  out.status = r->status;
  out.raw = r->body;
  if (r->get_header_value("Content-Type") == "application/json") {
    out.body = nlohmann::json::parse(r->body);
  }
  return out;
}

}  // namespace ipdlab::testing

#endif  // IPDLAB_TESTS_SUPPORT_HTTP_FIXTURE_HPP_
