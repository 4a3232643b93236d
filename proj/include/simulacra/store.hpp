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

// One JSON document per entity under a root directory:
//
//   designs/<design_id>.json
//   universes/<universe_id>.json
//   branches/<universe_id>/<thread_id>.json
//   audit/<name>.ndjson
//
// Each document is an envelope {schema_version, kind, seq, data}. Writes go
// to a temporary file that is renamed into place, and documents are never
// rewritten: saving identical data again is a no-op, different data under
// an existing id is a conflict.

#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "simulacra/model.hpp"

namespace simulacra {

inline constexpr int kSchemaVersion = 1;

struct UniverseSummary {
  std::string id;
  std::string parent_community;
  std::string goal;
  Timestamp created_at{};
  std::uint64_t seq = 0;
  std::size_t thread_count = 0;
  std::size_t roster_size = 0;
  std::uint64_t rng_seed = 0;
};

Json to_json(const UniverseSummary& summary);

class Store {
 public:
  explicit Store(std::filesystem::path root);

  /// Root from SIMULACRA_DATA_DIR, else `fallback`.
  static Store from_env(const std::filesystem::path& fallback = "simulacra-data");

  const std::filesystem::path& root() const noexcept { return root_; }

  std::string save_design(const CommunityDesign& design);
  CommunityDesign load_design(const std::string& id) const;
  std::vector<std::string> list_designs() const;

  void save_universe(const Universe& universe);
  Universe load_universe(const std::string& id) const;
  bool has_universe(const std::string& id) const;
  /// Ordered by (created_at, seq). An empty parent lists everything.
  std::vector<UniverseSummary> list_universes(std::string_view parent_community = {}) const;

  /// Stores branch threads of `universe_id`. Each must carry provenance
  /// naming that universe. Errors: kNotFound, kValidation, kConflict.
  void append_threads(const std::string& universe_id, const std::vector<Thread>& threads);
  std::vector<Thread> load_branches(const std::string& universe_id) const;
  Thread load_branch(const std::string& universe_id, const std::string& thread_id) const;

  std::filesystem::path audit_path(std::string_view name = "gateway") const;

  /// Reads an envelope and checks its version and kind.
  /// Errors: kIntegrity naming the path.
  static Json read_document(const std::filesystem::path& path, std::string_view kind);

 private:
  // Returns false when an identical document already exists.
  bool write_once(const std::filesystem::path& path, std::string_view kind, const Json& data);
  std::uint64_t next_seq();

  std::filesystem::path root_;
  mutable std::mutex mu_;
  std::uint64_t seq_ = 0;
};

/// Ids become file names, so they are limited to [A-Za-z0-9._-] and may not
/// start with a dot.
bool is_safe_id(std::string_view id);

}  // namespace simulacra
