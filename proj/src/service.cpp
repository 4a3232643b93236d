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

#include "simulacra/service.hpp"

#include <algorithm>
#include <cstdlib>
#include <random>
#include <regex>

#include "simulacra/scenario.hpp"
#include "simulacra/thread_engine.hpp"

namespace simulacra {

namespace {

ApiResponse json_response(int status, const Json& body) {
  return {status, body.dump(), {{"Content-Type", "application/json"}}};
}

ApiResponse error_response(int status, ErrorCode code, const std::string& message,
                           const std::vector<std::string>& violations = {}) {
  Json error{{"code", error_code_name(code)}, {"message", message}};
  if (!violations.empty()) error["violations"] = violations;
  return json_response(status, {{"error", error}});
}

ApiResponse error_response(const Error& e) {
  if (const auto* v = dynamic_cast<const ValidationError*>(&e)) {
    return error_response(http_status(e.code()), e.code(), e.what(), v->violations());
  }
  return error_response(http_status(e.code()), e.code(), e.what());
}

// A body that is not JSON at all; answered with 400 rather than 422.
class MalformedBody : public Error {
 public:
  explicit MalformedBody(const std::string& message) : Error(ErrorCode::kValidation, message) {}
};

// Empty bodies read as {}.
Json parse_body(const ApiRequest& request) {
  if (trim(request.body).empty()) return Json::object();
  try {
    return Json::parse(request.body);
  } catch (const Json::exception& e) {
    throw MalformedBody(std::string("request body is not valid JSON: ") + e.what());
  }
}

std::optional<std::uint64_t> optional_seed(const Json& body) {
  if (!body.contains("seed") || body["seed"].is_null()) return std::nullopt;
  if (!body["seed"].is_number_unsigned()) {
    throw Error(ErrorCode::kValidation, "seed must be a non-negative integer");
  }
  return body["seed"].get<std::uint64_t>();
}

std::size_t to_size(const std::string& text, std::string_view what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (...) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size() || text.front() == '-') {
    throw Error(ErrorCode::kValidation, std::string(what) + " must be a non-negative integer");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

std::string_view to_string(JobKind k) {
  return k == JobKind::kGenerate ? "generate" : "multiverse_community";
}

std::string_view to_string(JobState s) {
  switch (s) {
    case JobState::kQueued: return "queued";
    case JobState::kRunning: return "running";
    case JobState::kDone: return "done";
    case JobState::kFailed: return "failed";
  }
  return "unknown";
}

Json to_json(const Job& job) {
  Json j{{"id", job.id},
         {"kind", to_string(job.kind)},
         {"state", to_string(job.state)},
         {"design_id", job.design_id},
         {"progress", {{"done", job.progress_done}, {"total", job.progress_total}}},
         {"universe_id", job.universe_id ? Json(*job.universe_id) : Json(nullptr)}};
  if (job.error_code) {
    j["error"] = {{"code", error_code_name(*job.error_code)},
                  {"message", job.error_message.value_or("")}};
  } else {
    j["error"] = nullptr;
  }
  return j;
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation:
    case ErrorCode::kInvalidSpec:
    case ErrorCode::kOversizedDesign:
    case ErrorCode::kPrecondition:
      return 422;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kBackendUnavailable: return 503;
    case ErrorCode::kConfiguration: return 502;
    default: return 500;
  }
}

ServiceOptions ServiceOptions::from_env() {
  ServiceOptions o;
  if (const char* t = std::getenv("SIMULACRA_TOKEN"); t && *t) o.token = t;
  if (const char* m = std::getenv("SIMULACRA_MAX_JOBS"); m && *m) {
    o.max_concurrent_jobs = std::max<std::size_t>(1, std::strtoull(m, nullptr, 10));
  }
  return o;
}

Service::Service(Store& store, std::shared_ptr<Gateway> gateway, ServiceOptions options)
    : store_(store), gateway_(std::move(gateway)), options_(std::move(options)) {
  const std::size_t n = std::max<std::size_t>(1, options_.max_concurrent_jobs);
  for (std::size_t i = 0; i < n; ++i) workers_.emplace_back([this] { worker_loop(); });
}

Service::~Service() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  for (auto& w : workers_) w.join();
}

std::uint64_t Service::seed_or_fresh(const Json& body) {
  const auto seed = optional_seed(body);
  return seed ? *seed : fresh_seed();
}

std::uint64_t Service::fresh_seed() {
  if (options_.seed_source) return options_.seed_source();
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

std::optional<Job> Service::job(const std::string& id) const {
  std::lock_guard lock(mu_);
  const auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

bool Service::wait_idle(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  return idle_cv_.wait_for(lock, timeout, [this] { return queue_.empty() && active_ == 0; });
}

ApiResponse Service::handle(const ApiRequest& request) {
  ApiResponse response;
  if (request.method == "OPTIONS") {
    response.status = 204;
  } else if (options_.token && request.path.rfind("/api/", 0) == 0 &&
             [&] {
               const auto it = request.headers.find("authorization");
               return it == request.headers.end() || it->second != "Bearer " + *options_.token;
             }()) {
    response = error_response(401, ErrorCode::kValidation, "missing or wrong bearer token");
  } else if (const auto key = request.headers.find("idempotency-key");
             request.method == "POST" && key != request.headers.end() && !key->second.empty()) {
    const std::string fingerprint = request.method + " " + request.path + "\n" + request.body;
    bool replay = false;
    {
      std::lock_guard lock(idem_mu_);
      auto [it, inserted] = idempotency_.try_emplace(key->second, IdempotentEntry{fingerprint, {}});
      if (!inserted) {
        if (it->second.fingerprint != fingerprint) {
          response = error_response(409, ErrorCode::kConflict,
                                    "idempotency key was used with a different request");
        } else if (!it->second.response) {
          response = error_response(409, ErrorCode::kConflict,
                                    "a request with this idempotency key is in progress");
        } else {
          response = *it->second.response;
          response.headers["Idempotent-Replayed"] = "true";
        }
        replay = true;
      }
    }
    if (!replay) {
      response = route(request);
      std::lock_guard lock(idem_mu_);
      if (response.status >= 500) {
        idempotency_.erase(key->second);  // let the client retry
      } else {
        idempotency_[key->second].response = response;
      }
    }
  } else {
    response = route(request);
  }
  response.headers["Access-Control-Allow-Origin"] = options_.cors_origin;
  response.headers["Access-Control-Allow-Methods"] = "GET, POST, OPTIONS";
  response.headers["Access-Control-Allow-Headers"] =
      "Authorization, Content-Type, Idempotency-Key";
  return response;
}

ApiResponse Service::route(const ApiRequest& request) {
  static const std::regex kDesign(R"(^/api/designs/([^/]+)$)");
  static const std::regex kGenerate(R"(^/api/designs/([^/]+)/generate$)");
  static const std::regex kDesignMultiverse(R"(^/api/designs/([^/]+)/multiverse$)");
  static const std::regex kJob(R"(^/api/jobs/([^/]+)$)");
  static const std::regex kUniverse(R"(^/api/universes/([^/]+)$)");
  static const std::regex kThreads(R"(^/api/universes/([^/]+)/threads$)");
  static const std::regex kBranches(R"(^/api/universes/([^/]+)/branches$)");
  static const std::regex kWhatIf(R"(^/api/universes/([^/]+)/whatif$)");
  static const std::regex kThreadMultiverse(
      R"(^/api/universes/([^/]+)/threads/([^/]+)/multiverse$)");

  const auto& m = request.method;
  const auto& p = request.path;
  std::smatch match;
  try {
    if (m == "GET" && p == "/api/health") return json_response(200, {{"status", "ok"}});
    if (m == "POST" && p == "/api/designs") return post_design(request);
    if (m == "GET" && p == "/api/designs") return json_response(200, {{"designs", store_.list_designs()}});
    if (m == "GET" && std::regex_match(p, match, kDesign)) {
      return json_response(200, store_.load_design(match[1]));
    }
    if (m == "POST" && std::regex_match(p, match, kGenerate)) return post_generate(match[1], request);
    if (m == "POST" && std::regex_match(p, match, kDesignMultiverse)) {
      return post_design_multiverse(match[1], request);
    }
    if (m == "GET" && p == "/api/jobs") {
      std::lock_guard lock(mu_);
      Json list = Json::array();
      for (const auto& [id, job] : jobs_) list.push_back(to_json(job));
      return json_response(200, {{"jobs", list}});
    }
    if (m == "GET" && std::regex_match(p, match, kJob)) {
      const auto found = job(match[1]);
      if (!found) return error_response(404, ErrorCode::kNotFound, "job not found: " + match[1].str());
      return json_response(200, to_json(*found));
    }
    if (m == "GET" && p == "/api/universes") {
      const auto it = request.query.find("parent_community");
      Json list = Json::array();
      for (const auto& s : store_.list_universes(it == request.query.end() ? "" : it->second)) {
        list.push_back(to_json(s));
      }
      return json_response(200, {{"universes", list}});
    }
    if (m == "GET" && std::regex_match(p, match, kUniverse)) {
      return json_response(200, store_.load_universe(match[1]));
    }
    if (m == "GET" && std::regex_match(p, match, kThreads)) return get_threads(match[1], request);
    if (m == "GET" && std::regex_match(p, match, kBranches)) {
      return json_response(200, {{"threads", store_.load_branches(match[1])}});
    }
    if (m == "POST" && std::regex_match(p, match, kWhatIf)) return post_whatif(match[1], request);
    if (m == "POST" && std::regex_match(p, match, kThreadMultiverse)) {
      return post_thread_multiverse(match[1], match[2], request);
    }
    return error_response(404, ErrorCode::kNotFound, "no route for " + m + " " + p);
  } catch (const MalformedBody& e) {
    return error_response(400, e.code(), e.what());
  } catch (const Error& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return error_response(500, ErrorCode::kIo, e.what());
  }
}

ApiResponse Service::post_design(const ApiRequest& request) {
  const Json body = parse_body(request);
  std::vector<std::string> violations;
  const auto design = parse_design(body, violations);
  if (!design || !violations.empty()) {
    return error_response(422, ErrorCode::kValidation, "invalid community design", violations);
  }
  const std::string id = store_.save_design(*design);
  return json_response(201, {{"id", id}, {"design", *design}});
}

ApiResponse Service::post_generate(const std::string& id, const ApiRequest& request) {
  auto design = store_.load_design(id);
  const auto config = merge_config(GenerationConfig{}, parse_body(request));
  require_valid(config);
  return enqueue(JobKind::kGenerate, {{}, std::move(design), config, id, std::nullopt});
}

ApiResponse Service::post_design_multiverse(const std::string& id, const ApiRequest& request) {
  const Json body = parse_body(request);
  auto design = store_.load_design(id);
  GenerationConfig config;
  std::string parent = id;
  if (body.contains("universe_id")) {
    const auto source = store_.load_universe(body["universe_id"].get<std::string>());
    if (id != design_id(source.design)) {
      throw Error(ErrorCode::kInvalidSpec,
                  "universe " + source.id + " was not generated from design " + id);
    }
    config = source.config;
    parent = source.parent_community;
  }
  if (body.contains("config")) config = merge_config(config, body["config"]);
  require_valid(config);
  const auto seed = seed_or_fresh(body);
  return enqueue(JobKind::kMultiverseCommunity, {{}, std::move(design), config, parent, seed});
}

ApiResponse Service::enqueue(JobKind kind, QueuedJob work) {
  Job job;
  {
    std::lock_guard lock(mu_);
    const std::uint64_t n = ++job_counter_;
    const auto salt = static_cast<std::uint64_t>(
        std::chrono::steady_clock::now().time_since_epoch().count());
    job.id = "j-" + std::to_string(n) + "-" + hex64(mix64(n ^ salt)).substr(0, 8);
    job.kind = kind;
    job.design_id = design_id(work.design);
    job.progress_total = work.config.thread_count;
    work.id = job.id;
    jobs_[job.id] = job;
    queue_.emplace_back(kind, std::move(work));
  }
  cv_.notify_one();
  return json_response(202, {{"job_id", job.id}, {"job", to_json(job)}});
}

void Service::worker_loop() {
  for (;;) {
    std::pair<JobKind, QueuedJob> next;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      next = std::move(queue_.front());
      queue_.pop_front();
      ++active_;
      jobs_[next.second.id].state = JobState::kRunning;
    }
    run_job(next.second, next.first);
    {
      std::lock_guard lock(mu_);
      --active_;
    }
    idle_cv_.notify_all();
  }
}

void Service::run_job(const QueuedJob& work, JobKind kind) {
  const auto progress = [this, &work](std::size_t done, std::size_t total) {
    std::lock_guard lock(mu_);
    auto& job = jobs_[work.id];
    job.progress_done = std::max(job.progress_done, done);
    job.progress_total = total;
  };
  try {
    Universe universe;
    if (kind == JobKind::kGenerate) {
      UniverseOptions opts;
      opts.parent_community = work.parent_community;
      opts.created_at = options_.clock();
      opts.workers = options_.generation_workers;
      opts.on_progress = progress;
      universe = generate_universe(work.design, work.config, *gateway_, opts);
    } else {
      MultiverseOptions opts;
      opts.seed = work.seed;
      opts.created_at = options_.clock();
      opts.workers = options_.generation_workers;
      opts.on_progress = progress;
      universe = multiverse_community(work.parent_community, work.design, work.config, *gateway_, opts);
    }
    store_.save_universe(universe);
    std::lock_guard lock(mu_);
    auto& job = jobs_[work.id];
    job.universe_id = universe.id;
    job.progress_done = universe.threads.size();
    job.state = JobState::kDone;
  } catch (const Error& e) {
    std::lock_guard lock(mu_);
    auto& job = jobs_[work.id];
    job.state = JobState::kFailed;
    job.error_code = e.code();
    job.error_message = e.what();
  } catch (const std::exception& e) {
    std::lock_guard lock(mu_);
    auto& job = jobs_[work.id];
    job.state = JobState::kFailed;
    job.error_code = ErrorCode::kGenerationFailed;
    job.error_message = e.what();
  }
}

ApiResponse Service::get_threads(const std::string& universe_id, const ApiRequest& request) {
  const auto universe = store_.load_universe(universe_id);
  std::size_t page = 1;
  if (const auto it = request.query.find("page"); it != request.query.end()) {
    page = to_size(it->second, "page");
    if (page == 0) throw Error(ErrorCode::kValidation, "page numbers start at 1");
  }
  const std::size_t size = std::max<std::size_t>(1, options_.page_size);
  const std::size_t total = universe.threads.size();
  const std::size_t pages = std::max<std::size_t>(1, (total + size - 1) / size);
  Json threads = Json::array();
  for (std::size_t i = (page - 1) * size; i < std::min(total, page * size); ++i) {
    threads.push_back(universe.threads[i]);
  }
  return json_response(200, {{"universe_id", universe.id},
                             {"page", page},
                             {"page_size", size},
                             {"pages", pages},
                             {"total", total},
                             {"threads", threads}});
}

ApiResponse Service::post_whatif(const std::string& universe_id, const ApiRequest& request) {
  const Json body = parse_body(request);
  const auto universe = store_.load_universe(universe_id);
  const auto spec = whatif_spec_from_json(body);
  const auto seed = seed_or_fresh(body);
  const auto result = spec.intervention_text ? whatif_intervention(universe, spec, *gateway_, seed)
                                             : whatif_reply(universe, spec, *gateway_, seed);
  store_.append_threads(universe.id, result.threads);
  Json out = to_json(result);
  out["seed"] = seed;
  return json_response(200, out);
}

ApiResponse Service::post_thread_multiverse(const std::string& universe_id,
                                            const std::string& thread_id,
                                            const ApiRequest& request) {
  const Json body = parse_body(request);
  const auto universe = store_.load_universe(universe_id);
  std::size_t at = 0;
  std::size_t k = 3;
  try {
    at = body.at("at_utterance_index").get<std::size_t>();
    if (body.contains("alternatives")) k = body["alternatives"].get<std::size_t>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec, std::string("malformed multiverse request: ") + e.what());
  }
  const auto seed = seed_or_fresh(body);
  const auto result = multiverse_thread(universe, thread_id, at, k, *gateway_, seed);
  store_.append_threads(universe.id, result.threads);
  Json out = to_json(result);
  out["seed"] = seed;
  return json_response(200, out);
}

}  // namespace simulacra
