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

#include "simulacra/store.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <tuple>

namespace simulacra {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void require_id(std::string_view id, std::string_view what) {
  if (!is_safe_id(id)) {
    throw Error(ErrorCode::kValidation, "invalid " + std::string(what) + " id: " + std::string(id));
  }
}

fs::path existing(const fs::path& path, std::string_view what, std::string_view id) {
  if (!is_safe_id(id) || !fs::exists(path)) {
    throw Error(ErrorCode::kNotFound, std::string(what) + " not found: " + std::string(id));
  }
  return path;
}

std::vector<fs::path> json_files(const fs::path& dir) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

bool is_safe_id(std::string_view id) {
  if (id.empty() || id.size() > 200 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '-' || c == '_' || c == '.';
  });
}

Json to_json(const UniverseSummary& s) {
  return {{"id", s.id},
          {"parent_community", s.parent_community},
          {"goal", s.goal},
          {"created_at", format_timestamp(s.created_at)},
          {"seq", s.seq},
          {"thread_count", s.thread_count},
          {"roster_size", s.roster_size},
          {"rng_seed", s.rng_seed}};
}

Store::Store(fs::path root) : root_(std::move(root)) {
  for (const char* sub : {"designs", "universes", "branches", "audit"}) {
    std::error_code ec;
    fs::create_directories(root_ / sub, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create " + (root_ / sub).string() + ": " + ec.message());
  }
  // Continue the sequence after the highest stored value.
  for (const char* sub : {"designs", "universes"}) {
    for (const auto& path : json_files(root_ / sub)) {
      try {
        seq_ = std::max(seq_, Json::parse(read_file(path)).at("seq").get<std::uint64_t>());
      } catch (...) {
        // Corrupt documents are reported when they are loaded.
      }
    }
  }
  for (const auto& dir : fs::directory_iterator(root_ / "branches")) {
    for (const auto& path : json_files(dir.path())) {
      try {
        seq_ = std::max(seq_, Json::parse(read_file(path)).at("seq").get<std::uint64_t>());
      } catch (...) {
      }
    }
  }
}

Store Store::from_env(const fs::path& fallback) {
  const char* dir = std::getenv("SIMULACRA_DATA_DIR");
  return Store(dir && *dir ? fs::path(dir) : fallback);
}

std::uint64_t Store::next_seq() { return ++seq_; }

Json Store::read_document(const fs::path& path, std::string_view kind) {
  Json doc;
  try {
    doc = Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kIntegrity, "corrupt document " + path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("data") || !doc.contains("kind") ||
      !doc.contains("schema_version")) {
    throw Error(ErrorCode::kIntegrity, "malformed envelope in " + path.string());
  }
  if (doc["schema_version"] != kSchemaVersion) {
    throw Error(ErrorCode::kIntegrity, "unsupported schema_version in " + path.string());
  }
  if (doc["kind"] != kind) {
    throw Error(ErrorCode::kIntegrity, "expected a " + std::string(kind) + " document in " +
                                           path.string());
  }
  return doc;
}

bool Store::write_once(const fs::path& path, std::string_view kind, const Json& data) {
  if (fs::exists(path)) {
    if (read_document(path, kind)["data"] == data) return false;
    throw Error(ErrorCode::kConflict, path.string() + " already holds different content");
  }
  static std::atomic<std::uint64_t> counter{0};
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.parent_path() / ("." + path.filename().string() + ".tmp." +
                                             std::to_string(::getpid()) + "." +
                                             std::to_string(counter++));
  const Json doc{{"schema_version", kSchemaVersion}, {"kind", kind}, {"seq", next_seq()},
                 {"data", data}};
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << doc.dump(2) << '\n';
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot move document into place at " + path.string());
  }
  return true;
}

std::string Store::save_design(const CommunityDesign& design) {
  require_valid(design);
  const std::string id = design_id(design);
  std::lock_guard lock(mu_);
  write_once(root_ / "designs" / (id + ".json"), "design", Json(design));
  return id;
}

CommunityDesign Store::load_design(const std::string& id) const {
  const auto path = existing(root_ / "designs" / (id + ".json"), "design", id);
  const auto doc = read_document(path, "design");
  std::vector<std::string> violations;
  auto design = parse_design(doc["data"], violations);
  if (!design || !violations.empty()) {
    throw Error(ErrorCode::kIntegrity, "invalid design in " + path.string());
  }
  return *design;
}

std::vector<std::string> Store::list_designs() const {
  std::vector<std::string> out;
  for (const auto& path : json_files(root_ / "designs")) out.push_back(path.stem().string());
  return out;
}

void Store::save_universe(const Universe& universe) {
  require_id(universe.id, "universe");
  const auto problems = validate_universe(universe);
  if (!problems.empty()) throw ValidationError(problems);
  std::lock_guard lock(mu_);
  write_once(root_ / "universes" / (universe.id + ".json"), "universe", Json(universe));
}

Universe Store::load_universe(const std::string& id) const {
  const auto path = existing(root_ / "universes" / (id + ".json"), "universe", id);
  const auto doc = read_document(path, "universe");
  try {
    return doc["data"].get<Universe>();
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kIntegrity, "invalid universe in " + path.string() + ": " + e.what());
  }
}

bool Store::has_universe(const std::string& id) const {
  return is_safe_id(id) && fs::exists(root_ / "universes" / (id + ".json"));
}

std::vector<UniverseSummary> Store::list_universes(std::string_view parent) const {
  std::vector<UniverseSummary> out;
  for (const auto& path : json_files(root_ / "universes")) {
    const auto doc = read_document(path, "universe");
    const auto& data = doc["data"];
    UniverseSummary s;
    try {
      s.id = data.at("id").get<std::string>();
      s.parent_community = data.at("parent_community").get<std::string>();
      if (!parent.empty() && s.parent_community != parent) continue;
      s.goal = data.at("design").at("goal").get<std::string>();
      s.created_at = parse_timestamp(data.at("created_at").get<std::string>());
      s.seq = doc.value("seq", std::uint64_t{0});
      s.thread_count = data.at("threads").size();
      s.roster_size = data.at("roster").size();
      s.rng_seed = data.at("config").at("rng_seed").get<std::uint64_t>();
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kIntegrity, "invalid universe in " + path.string() + ": " + e.what());
    }
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.created_at, a.seq) < std::tie(b.created_at, b.seq);
  });
  return out;
}

void Store::append_threads(const std::string& universe_id, const std::vector<Thread>& threads) {
  if (!has_universe(universe_id)) {
    throw Error(ErrorCode::kNotFound, "universe not found: " + universe_id);
  }
  std::vector<std::string> problems;
  for (const auto& t : threads) {
    if (!is_safe_id(t.id())) problems.push_back("invalid thread id: " + t.id());
    if (!t.provenance()) {
      problems.push_back("branch thread " + t.id() + " has no provenance");
    } else if (t.provenance()->source_universe != universe_id) {
      problems.push_back("branch thread " + t.id() + " belongs to another universe");
    }
  }
  if (!problems.empty()) throw ValidationError(problems);
  std::lock_guard lock(mu_);
  for (const auto& t : threads) {
    write_once(root_ / "branches" / universe_id / (t.id() + ".json"), "thread", Json(t));
  }
}

std::vector<Thread> Store::load_branches(const std::string& universe_id) const {
  if (!has_universe(universe_id)) {
    throw Error(ErrorCode::kNotFound, "universe not found: " + universe_id);
  }
  std::vector<std::pair<std::uint64_t, Thread>> found;
  for (const auto& path : json_files(root_ / "branches" / universe_id)) {
    const auto doc = read_document(path, "thread");
    try {
      found.emplace_back(doc.value("seq", std::uint64_t{0}), doc["data"].get<Thread>());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kIntegrity, "invalid thread in " + path.string() + ": " + e.what());
    }
  }
  std::stable_sort(found.begin(), found.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Thread> out;
  for (auto& [seq, t] : found) out.push_back(std::move(t));
  return out;
}

Thread Store::load_branch(const std::string& universe_id, const std::string& thread_id) const {
  if (!has_universe(universe_id)) {
    throw Error(ErrorCode::kNotFound, "universe not found: " + universe_id);
  }
  const auto path = existing(root_ / "branches" / universe_id / (thread_id + ".json"),
                             "branch thread", thread_id);
  const auto doc = read_document(path, "thread");
  try {
    return doc["data"].get<Thread>();
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kIntegrity, "invalid thread in " + path.string() + ": " + e.what());
  }
}

fs::path Store::audit_path(std::string_view name) const {
  return root_ / "audit" / (std::string(name) + ".ndjson");
}

}  // namespace simulacra
