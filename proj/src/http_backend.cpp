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

#include <regex>

#include "simulacra/gateway.hpp"

namespace simulacra {

namespace {

std::unique_ptr<httplib::Client> make_client(const std::string& origin,
                                             const BackendConfig& config) {
  auto cli = std::make_unique<httplib::Client>(origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.request_timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
      config.request_timeout - secs);
  cli->set_connection_timeout(secs.count(), usecs.count());
  cli->set_read_timeout(secs.count(), usecs.count());
  cli->set_write_timeout(secs.count(), usecs.count());
  return cli;
}

}  // namespace

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint_url, m, url_re)) {
    throw Error(ErrorCode::kConfiguration, "malformed endpoint URL: " + config_.endpoint_url);
  }
  origin_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (origin_.rfind("https://", 0) == 0) {
    throw Error(ErrorCode::kConfiguration, "built without TLS support: " + origin_);
  }
#endif
}

Json HttpBackend::request_body(const CompletionRequest& request) const {
  Json body{{"model", config_.model_name},
            {"prompt", request.prompt},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens},
            {"stop", request.stop}};
  if (config_.send_seed && request.seed) body["seed"] = *request.seed;
  return body;
}

CompletionResult HttpBackend::parse_response(std::string_view body) {
  const auto j = Json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() ||
      j["choices"].empty() || !j["choices"][0].contains("text") ||
      !j["choices"][0]["text"].is_string()) {
    throw TransportError("unexpected completion response body");
  }
  const auto& choice = j["choices"][0];
  CompletionResult result;
  result.text = choice["text"].get<std::string>();
  const auto reason = choice.value("finish_reason", Json()).is_string()
                          ? choice["finish_reason"].get<std::string>()
                          : std::string();
  if (reason == "stop" || reason == "stop_sequence") {
    result.finish_reason = FinishReason::kStopSequence;
  } else if (reason == "length") {
    result.finish_reason = FinishReason::kLength;
  } else {
    result.finish_reason = FinishReason::kOther;
  }
  return result;
}

CompletionResult HttpBackend::complete(const CompletionRequest& request) {
  auto cli = make_client(origin_, config_);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  auto res = cli->Post(path_, headers, request_body(request).dump(), "application/json");
  if (!res) {
    throw TransportError("request to " + origin_ + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status >= 400 && res->status < 500) {
    throw Error(ErrorCode::kConfiguration,
                "backend rejected request with HTTP " + std::to_string(res->status) +
                    ": " + res->body.substr(0, 500));
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError("backend answered HTTP " + std::to_string(res->status));
  }
  return parse_response(res->body);
}

}  // namespace simulacra
