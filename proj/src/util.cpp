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

#include "simulacra/util.hpp"

#include <cctype>
#include <cstdio>
#include <ctime>

#include "simulacra/error.hpp"

namespace simulacra {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation: return "validation";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kInvalidSpec: return "invalid_spec";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kIntegrity: return "integrity";
    case ErrorCode::kBackendUnavailable: return "backend_unavailable";
    case ErrorCode::kConfiguration: return "configuration";
    case ErrorCode::kEmptyGeneration: return "empty_generation";
    case ErrorCode::kOversizedDesign: return "oversized_design";
    case ErrorCode::kBudgetExhausted: return "budget_exhausted";
    case ErrorCode::kNoCandidate: return "no_candidate";
    case ErrorCode::kExpansionStalled: return "expansion_stalled";
    case ErrorCode::kPostGenerationFailed: return "post_generation_failed";
    case ErrorCode::kGenerationFailed: return "generation_failed";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

namespace {

std::string join_violations(const std::vector<std::string>& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v;
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error(ErrorCode::kValidation, join_violations(violations)),
      violations_(std::move(violations)) {}

std::string_view trim(std::string_view text) {
  const auto is_space = [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
  };
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  return text;
}

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (auto& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

bool starts_with_ci(std::string_view text, std::string_view prefix) {
  if (text.size() < prefix.size()) return false;
  return to_lower_ascii(text.substr(0, prefix.size())) ==
         to_lower_ascii(prefix);
}

std::size_t char_length(std::string_view utf8) {
  std::size_t n = 0;
  for (const char c : utf8) {
    // Count every byte that is not a continuation byte (10xxxxxx).
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) {
  return mix64(seed ^ mix64(value));
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

std::string format_timestamp(Timestamp ts) {
  const std::time_t t = static_cast<std::time_t>(ts.time_since_epoch().count());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Timestamp parse_timestamp(std::string_view text) {
  std::tm tm{};
  int consumed = 0;
  const std::string s(text);
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2dZ%n", &tm.tm_year,
                  &tm.tm_mon, &tm.tm_mday, &tm.tm_hour, &tm.tm_min,
                  &tm.tm_sec, &consumed) != 6 ||
      static_cast<std::size_t>(consumed) != s.size()) {
    throw ValidationError({"created_at is not an ISO-8601 UTC timestamp: " + s});
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  return Timestamp{std::chrono::seconds{timegm(&tm)}};
}

Timestamp now_seconds() {
  return std::chrono::time_point_cast<std::chrono::seconds>(
      std::chrono::system_clock::now());
}

}  // namespace simulacra
