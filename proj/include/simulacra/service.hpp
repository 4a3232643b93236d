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

// HTTP API over the engine and the store. Routing lives in
// Service::handle, which takes a transport-neutral request; HttpServer binds
// it to a socket. Universe generation runs as a queued job; WhatIf and
// thread-level Multiverse answer synchronously.

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "simulacra/gateway.hpp"
#include "simulacra/model.hpp"
#include "simulacra/store.hpp"

namespace simulacra {

enum class JobKind { kGenerate, kMultiverseCommunity };
enum class JobState { kQueued, kRunning, kDone, kFailed };

std::string_view to_string(JobKind k);
std::string_view to_string(JobState s);

struct Job {
  std::string id;
  JobKind kind = JobKind::kGenerate;
  JobState state = JobState::kQueued;
  std::string design_id;
  std::size_t progress_done = 0;
  std::size_t progress_total = 0;
  std::optional<std::string> universe_id;
  std::optional<ErrorCode> error_code;
  std::optional<std::string> error_message;
};

Json to_json(const Job& job);

struct ServiceOptions {
  /// Jobs allowed to run at once.
  std::size_t max_concurrent_jobs = 1;
  /// Worker threads per universe generation.
  std::size_t generation_workers = 1;
  /// When set, every /api request needs "Authorization: Bearer <token>".
  std::optional<std::string> token;
  std::string cors_origin = "*";
  std::size_t page_size = 20;
  /// Creation timestamps for new universes.
  std::function<Timestamp()> clock = now_seconds;
  /// Seeds for requests that do not name one.
  std::function<std::uint64_t()> seed_source;

  /// SIMULACRA_TOKEN, SIMULACRA_MAX_JOBS.
  static ServiceOptions from_env();
};

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  /// Keys are lower-case.
  std::map<std::string, std::string> headers;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::map<std::string, std::string> headers;

  Json json() const { return Json::parse(body); }
};

/// HTTP status for an engine error code.
int http_status(ErrorCode code);

class Service {
 public:
  Service(Store& store, std::shared_ptr<Gateway> gateway, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  ApiResponse handle(const ApiRequest& request);

  std::optional<Job> job(const std::string& id) const;
  /// Blocks until no job is queued or running, or the timeout passes.
  bool wait_idle(std::chrono::milliseconds timeout);

 private:
  struct IdempotentEntry {
    std::string fingerprint;
    std::optional<ApiResponse> response;  // empty while in flight
  };
  struct QueuedJob {
    std::string id;
    CommunityDesign design;
    GenerationConfig config;
    std::string parent_community;
    std::optional<std::uint64_t> seed;
  };

  ApiResponse route(const ApiRequest& request);
  ApiResponse enqueue(JobKind kind, QueuedJob work);
  void worker_loop();
  void run_job(const QueuedJob& work, JobKind kind);
  std::uint64_t fresh_seed();
  std::uint64_t seed_or_fresh(const Json& body);

  ApiResponse post_design(const ApiRequest& request);
  ApiResponse post_generate(const std::string& id, const ApiRequest& request);
  ApiResponse post_design_multiverse(const std::string& id, const ApiRequest& request);
  ApiResponse get_threads(const std::string& universe_id, const ApiRequest& request);
  ApiResponse post_whatif(const std::string& universe_id, const ApiRequest& request);
  ApiResponse post_thread_multiverse(const std::string& universe_id, const std::string& thread_id,
                                     const ApiRequest& request);

  Store& store_;
  std::shared_ptr<Gateway> gateway_;
  ServiceOptions options_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable idle_cv_;
  std::map<std::string, Job> jobs_;
  std::deque<std::pair<JobKind, QueuedJob>> queue_;
  std::size_t active_ = 0;
  std::uint64_t job_counter_ = 0;
  bool stopping_ = false;
  std::vector<std::thread> workers_;

  std::mutex idem_mu_;
  std::unordered_map<std::string, IdempotentEntry> idempotency_;
};

/// Serves a Service over HTTP.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  /// Binds (port 0 picks a free port) and serves on a background thread.
  /// Returns the bound port.
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace simulacra
