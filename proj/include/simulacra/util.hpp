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
#include <cstdint>
#include <string>
#include <string_view>

namespace simulacra {

using Timestamp = std::chrono::sys_seconds;

std::string_view trim(std::string_view text);
std::string to_lower_ascii(std::string_view text);
bool starts_with_ci(std::string_view text, std::string_view prefix);

/// Number of Unicode code points in a UTF-8 string. Prompt budgets are
/// expressed in characters, not bytes.
std::size_t char_length(std::string_view utf8);

// Stable hashing: FNV-1a over bytes, splitmix64 finalizer for mixing. Both
// are fixed algorithms so ids and derived seeds agree across platforms.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value);
std::string hex64(std::uint64_t value);

std::string format_timestamp(Timestamp ts);  // "YYYY-MM-DDTHH:MM:SSZ"
Timestamp parse_timestamp(std::string_view text);
Timestamp now_seconds();

}  // namespace simulacra
