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

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace simulacra {

enum class ErrorCode {
  kValidation,          // a value broke a type invariant
  kPrecondition,        // caller passed arguments outside an operation's domain
  kInvalidSpec,         // WhatIf / Multiverse request does not fit the universe
  kNotFound,
  kConflict,
  kIntegrity,           // stored document is unreadable or corrupt
  kBackendUnavailable,  // transport failed after all retries
  kConfiguration,       // backend rejected the request (HTTP 4xx)
  kEmptyGeneration,
  kOversizedDesign,
  kBudgetExhausted,
  kNoCandidate,
  kExpansionStalled,
  kPostGenerationFailed,
  kGenerationFailed,
  kIo,
};

std::string_view error_code_name(ErrorCode code);

/// Base class of every error the engine raises. The code is the stable,
/// machine-readable part; what() carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by constructors and parsers when fields break invariants. Carries
/// every violation found, not only the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const noexcept {
    return violations_;
  }

 private:
  std::vector<std::string> violations_;
};

}  // namespace simulacra
