// Copyright 2026 The Simulacra Authors
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

#include <httplib.h>

#include <thread>

#include "simulacra/service.hpp"

namespace simulacra {

struct HttpServer::Impl {
  explicit Impl(Service& s) : service(s) {
    const auto handler = [this](const httplib::Request& req, httplib::Response& res) {
      ApiRequest request;
      request.method = req.method;
      request.path = req.path;
      request.body = req.body;
      for (const auto& [k, v] : req.params) request.query.emplace(k, v);
      for (const auto& [k, v] : req.headers) request.headers.emplace(to_lower_ascii(k), v);
      const auto response = service.handle(request);
      res.status = response.status;
      std::string content_type = "application/json";
      for (const auto& [k, v] : response.headers) {
        if (k == "Content-Type") {
          content_type = v;
        } else {
          res.set_header(k, v);
        }
      }
      if (!response.body.empty()) res.set_content(response.body, content_type);
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.Options(".*", handler);
  }

  Service& service;
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw Error(ErrorCode::kIo, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace simulacra
