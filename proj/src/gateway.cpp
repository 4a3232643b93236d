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

#include "simulacra/gateway.hpp"

#include <cstdlib>
#include <thread>

namespace simulacra {

BackendConfig BackendConfig::from_env() {
  BackendConfig c;
  if (const char* v = std::getenv("SIMULACRA_API_KEY")) c.api_key = v;
  if (const char* v = std::getenv("SIMULACRA_API_URL")) c.endpoint_url = v;
  if (const char* v = std::getenv("SIMULACRA_MODEL")) c.model_name = v;
  return c;
}

std::vector<std::string> validate_backend_config(const BackendConfig& config) {
  std::vector<std::string> out;
  if (config.request_timeout.count() <= 0) {
    out.emplace_back("request_timeout must be positive");
  }
  if (config.min_request_interval.count() < 0) {
    out.emplace_back("min_request_interval must be non-negative");
  }
  if (config.model_name.empty()) out.emplace_back("model_name is empty");
  return out;
}

// ---------------------------------------------------------------- Audit

Json to_json(const AuditRecord& r) {
  return Json{{"timestamp", format_timestamp(r.timestamp)},
              {"prompt_hash", r.prompt_hash},
              {"prompt", r.prompt},
              {"completion", r.completion},
              {"temperature", r.temperature},
              {"operation", r.operation}};
}

AuditRecord audit_record_from_json(const Json& j) {
  AuditRecord r;
  r.timestamp = parse_timestamp(j.at("timestamp").get<std::string>());
  r.prompt_hash = j.at("prompt_hash").get<std::string>();
  r.prompt = j.at("prompt").get<std::string>();
  r.completion = j.at("completion").get<std::string>();
  r.temperature = j.at("temperature").get<double>();
  r.operation = j.at("operation").get<std::string>();
  return r;
}

AuditLog::AuditLog(std::filesystem::path ndjson_path) : path_(std::move(ndjson_path)) {
  if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
  file_.open(*path_, std::ios::app);
  if (!file_) throw Error(ErrorCode::kIo, "cannot open audit log " + path_->string());
}

void AuditLog::append(AuditRecord record) {
  std::lock_guard lock(mu_);
  if (file_.is_open()) {
    file_ << to_json(record).dump() << '\n';
    file_.flush();
  }
  records_.push_back(std::move(record));
}

std::vector<AuditRecord> AuditLog::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

std::size_t AuditLog::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

std::vector<AuditRecord> AuditLog::read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "no audit log at " + path.string());
  std::vector<AuditRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      out.push_back(audit_record_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kIntegrity,
                  "corrupt audit line in " + path.string() + ": " + e.what());
    }
  }
  return out;
}

// -------------------------------------------------------------- Gateway

bool scrub_stop_strings(std::string& text, const std::vector<std::string>& stop) {
  auto cut = std::string::npos;
  for (const auto& s : stop) {
    if (s.empty()) continue;
    cut = std::min(cut, text.find(s));
  }
  if (cut == std::string::npos) return false;
  text.resize(cut);
  return true;
}

Gateway::Gateway(std::shared_ptr<CompletionBackend> backend, BackendConfig config,
                 std::shared_ptr<AuditLog> audit, Sleeper sleeper)
    : backend_(std::move(backend)),
      config_(std::move(config)),
      audit_(std::move(audit)),
      sleeper_(std::move(sleeper)) {
  if (!backend_) throw Error(ErrorCode::kPrecondition, "gateway needs a backend");
  if (!audit_) audit_ = std::make_shared<AuditLog>();
  if (!sleeper_) {
    sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
  auto violations = validate_backend_config(config_);
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

void Gateway::wait_for_slot() {
  if (config_.min_request_interval.count() == 0) return;
  // Held for the whole wait so that dispatch is serialized.
  std::lock_guard lock(rate_mu_);
  const auto now = std::chrono::steady_clock::now();
  if (last_dispatch_) {
    const auto ready = *last_dispatch_ + config_.min_request_interval;
    if (ready > now) {
      sleeper_(std::chrono::duration_cast<std::chrono::milliseconds>(ready - now));
    }
  }
  last_dispatch_ = std::chrono::steady_clock::now();
}

CompletionResult Gateway::complete(const CompletionRequest& request,
                                   std::string_view operation) {
  if (request.prompt.empty()) {
    throw Error(ErrorCode::kPrecondition, "completion prompt is empty");
  }
  if (request.stop.empty()) {
    throw Error(ErrorCode::kPrecondition, "completion stop list is empty");
  }

  CompletionResult result;
  std::chrono::milliseconds backoff{1000};
  for (std::size_t attempt = 0;; ++attempt) {
    wait_for_slot();
    try {
      result = backend_->complete(request);
      break;
    } catch (const TransportError& e) {
      if (attempt >= config_.max_retries) {
        throw Error(ErrorCode::kBackendUnavailable,
                    "backend unavailable after " + std::to_string(attempt + 1) +
                        " attempts: " + e.what());
      }
      sleeper_(backoff);
      backoff *= 2;
    }
  }

  if (scrub_stop_strings(result.text, request.stop)) {
    result.finish_reason = FinishReason::kStopSequence;
  }

  audit_->append(AuditRecord{now_seconds(), hex64(fnv1a64(request.prompt)),
                             request.prompt, result.text, request.temperature,
                             std::string(operation)});

  if (trim(result.text).empty()) {
    throw Error(ErrorCode::kEmptyGeneration, "backend returned an empty completion");
  }
  return result;
}

// ------------------------------------------------------ ScriptedBackend

CompletionResult ScriptedBackend::complete(const CompletionRequest& request) {
  std::size_t call = 0;
  {
    std::lock_guard lock(mu_);
    call = requests_.size();
    requests_.push_back(request);
  }
  return script_(request, call);
}

std::size_t ScriptedBackend::calls() const {
  std::lock_guard lock(mu_);
  return requests_.size();
}

std::vector<CompletionRequest> ScriptedBackend::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::shared_ptr<Gateway> make_mock_gateway(std::shared_ptr<AuditLog> audit) {
  return std::make_shared<Gateway>(std::make_shared<MockBackend>(), BackendConfig{},
                                   std::move(audit));
}

}  // namespace simulacra
