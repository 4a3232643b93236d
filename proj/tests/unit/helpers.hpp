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

// Shared builders for the unit tests.

#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "simulacra/model.hpp"

namespace simulacra::testing {

inline CommunityDesign psychotherapy_design() {
  CommunityDesign d;
  d.goal = "sharing your psychotherapy stories and questions";
  for (const char* r : {"No encouraging suicide", "No anti-therapy", "No trolling", "No incivility",
                        "No self-marketing"}) {
    d.rules.emplace_back(r);
  }
  d.seed_personas = {
      Persona("Layla Li", "a college student studying to be a social worker"),
      Persona("Tom Cheng", "a recovering addict who likes to spot bad therapists"),
      Persona("Maria Gomez", "a psychiatric nurse on night shifts"),
      Persona("Sam Patel", "a first-year therapy client who is skeptical but curious"),
      Persona("Jin Park", "a retired counselor who mentors new therapists"),
      Persona("Ada Obi", "a graduate student researching group therapy"),
      Persona("Leo Rossi", "a father looking for a family therapist"),
      Persona("Nina Berg", "a peer-support volunteer"),
      Persona("Omar Haddad", "a paramedic dealing with work stress"),
      Persona("Ivy Chen", "a high-school teacher interested in school counseling"),
  };
  return d;
}

inline GenerationConfig small_config(std::uint64_t seed = 1, std::size_t threads = 4,
                                     std::size_t pool = 30) {
  GenerationConfig c;
  c.rng_seed = seed;
  c.thread_count = threads;
  c.persona_pool_size = pool;
  return c;
}

/// Alternating authors, one utterance each.
inline Thread make_thread(const std::string& id, const std::vector<std::string>& authors,
                          const std::vector<std::string>& texts) {
  std::vector<Utterance> us;
  for (std::size_t i = 0; i < authors.size(); ++i) {
    us.emplace_back(utterance_id(id, i), authors[i], texts[i],
                    i == 0 ? UtteranceKind::kPost : UtteranceKind::kReply, i);
  }
  return Thread(id, std::move(us));
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("simulacra-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace simulacra::testing
