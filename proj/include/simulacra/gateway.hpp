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

#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simulacra/model.hpp"

namespace simulacra {

inline constexpr std::size_t kContentMaxTokens = 256;
inline constexpr std::size_t kExpansionMaxTokens = 1024;

struct BackendConfig {
  std::string endpoint_url = "https://api.openai.com/v1/completions";
  std::string api_key;
  std::string model_name = "davinci";
  std::size_t max_retries = 3;
  std::chrono::milliseconds request_timeout{60'000};
  std::chrono::milliseconds min_request_interval{0};
  /// Forward CompletionRequest::seed as a "seed" field on the wire.
  bool send_seed = false;

  /// Defaults overridden by SIMULACRA_API_KEY, SIMULACRA_API_URL and
  /// SIMULACRA_MODEL when set.
  static BackendConfig from_env();
};

std::vector<std::string> validate_backend_config(const BackendConfig& config);

/// A transport-level failure (connection refused, timeout, HTTP 5xx,
/// unparseable body). The gateway retries these.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& message)
      : Error(ErrorCode::kBackendUnavailable, message) {}
};

/// One raw attempt against some completion service. Implementations throw
/// TransportError for retryable failures and Error(kConfiguration) for
/// rejected requests.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual CompletionResult complete(const CompletionRequest& request) = 0;
  virtual std::string_view name() const = 0;
};

// ---------------------------------------------------------------- Audit

struct AuditRecord {
  Timestamp timestamp{};
  std::string prompt_hash;
  std::string prompt;
  std::string completion;
  double temperature = 0.0;
  std::string operation;
};

Json to_json(const AuditRecord& record);
AuditRecord audit_record_from_json(const Json& j);

/// Append-only audit trail. Always kept in memory; when constructed with a
/// path, every record is also appended to that file as one JSON line.
class AuditLog {
 public:
  AuditLog() = default;
  explicit AuditLog(std::filesystem::path ndjson_path);

  void append(AuditRecord record);
  std::vector<AuditRecord> records() const;
  std::size_t size() const;
  const std::optional<std::filesystem::path>& path() const noexcept { return path_; }

  static std::vector<AuditRecord> read_file(const std::filesystem::path& path);

 private:
  mutable std::mutex mu_;
  std::vector<AuditRecord> records_;
  std::optional<std::filesystem::path> path_;
  std::ofstream file_;
};

// -------------------------------------------------------------- Gateway

/// The single entry point every module uses to reach a language model.
/// Adds precondition checks, retry with exponential backoff, rate limiting,
/// stop-string scrubbing and auditing on top of a CompletionBackend.
/// Safe to share between threads.
class Gateway {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  Gateway(std::shared_ptr<CompletionBackend> backend, BackendConfig config,
          std::shared_ptr<AuditLog> audit = std::make_shared<AuditLog>(),
          Sleeper sleeper = {});

  /// Errors: kPrecondition on empty prompt or stop list; kConfiguration on
  /// a rejected request (never retried); kBackendUnavailable once
  /// max_retries retries have failed; kEmptyGeneration when the cleaned
  /// completion is blank (the call is still audited).
  CompletionResult complete(const CompletionRequest& request,
                            std::string_view operation = "complete");

  AuditLog& audit() noexcept { return *audit_; }
  std::shared_ptr<AuditLog> audit_ptr() const noexcept { return audit_; }
  const BackendConfig& config() const noexcept { return config_; }
  std::string_view backend_name() const { return backend_->name(); }

 private:
  void wait_for_slot();

  std::shared_ptr<CompletionBackend> backend_;
  BackendConfig config_;
  std::shared_ptr<AuditLog> audit_;
  Sleeper sleeper_;
  std::mutex rate_mu_;
  std::optional<std::chrono::steady_clock::time_point> last_dispatch_;
};

/// Truncates at the earliest occurrence of any stop string. Returns true
/// when something was cut.
bool scrub_stop_strings(std::string& text, const std::vector<std::string>& stop);

// ------------------------------------------------------------- Backends

/// Talks to a remote completion endpoint: POST {model, prompt, temperature,
/// max_tokens, stop} and read choices[0].{text, finish_reason}.
class HttpBackend : public CompletionBackend {
 public:
  explicit HttpBackend(BackendConfig config);

  CompletionResult complete(const CompletionRequest& request) override;
  std::string_view name() const override { return "live"; }

  Json request_body(const CompletionRequest& request) const;
  static CompletionResult parse_response(std::string_view body);

 private:
  BackendConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
};

/// Deterministic offline stand-in for a language model. Classifies each
/// prompt by its template markers, seeds a PRNG from a stable hash of the
/// request and samples from a bundled sentence corpus.
class MockBackend : public CompletionBackend {
 public:
  enum class PromptClass { kPersonaExpansion, kHeadline, kReply, kGeneric };

  CompletionResult complete(const CompletionRequest& request) override;
  std::string_view name() const override { return "mock"; }

  static PromptClass classify(std::string_view prompt);
  static std::uint64_t request_hash(const CompletionRequest& request);
};

/// Test double driven by a callback; counts invocations.
class ScriptedBackend : public CompletionBackend {
 public:
  using Script = std::function<CompletionResult(const CompletionRequest&, std::size_t call)>;

  explicit ScriptedBackend(Script script) : script_(std::move(script)) {}

  CompletionResult complete(const CompletionRequest& request) override;
  std::string_view name() const override { return "scripted"; }

  std::size_t calls() const;
  std::vector<CompletionRequest> requests() const;

 private:
  Script script_;
  mutable std::mutex mu_;
  std::vector<CompletionRequest> requests_;
};

/// Convenience: gateway over a MockBackend with an in-memory audit log.
std::shared_ptr<Gateway> make_mock_gateway(
    std::shared_ptr<AuditLog> audit = std::make_shared<AuditLog>());

}  // namespace simulacra
