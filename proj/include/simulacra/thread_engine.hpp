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

// The generation state machine. A thread is a post by a uniformly drawn
// roster member followed by a capped-geometric run of replies: the thread
// draws one reply probability p, then before each reply continues with
// probability p until max_replies is reached.
//
// Draw order on a thread's stream (fixed, so runs are reproducible):
//   poster index; one u64 per post attempt (request seed); p (two
//   uniforms); then per reply: continue uniform, branch uniform, candidate
//   index, one u64 per reply attempt.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "simulacra/gateway.hpp"
#include "simulacra/model.hpp"
#include "simulacra/rng.hpp"

namespace simulacra {

/// Empty completions are regenerated this many times before giving up.
inline constexpr std::size_t kEmptyResamples = 3;

double sample_reply_probability(RngStream& rng, const GenerationConfig& config);

enum class ResponderBranch { kNew, kExisting };

struct ResponderChoice {
  Persona persona;
  ResponderBranch branch;
};

/// A coin with probability new_persona_rate picks NEW (uniform over roster
/// members who have not spoken) or EXISTING (uniform over participants
/// other than the latest speaker). An empty branch falls back to the other.
/// Errors: kNoCandidate when both branches are empty.
ResponderChoice select_responder(std::span<const Persona> roster,
                                 std::span<const Persona> participants,
                                 std::string_view latest, RngStream& rng,
                                 const GenerationConfig& config);

/// Everything a generation call needs besides its random stream.
struct GenerationContext {
  const CommunityDesign& design;
  const GenerationConfig& config;
  Gateway& gateway;
  double temperature;
  std::string operation = "generate";
};

/// One completion turned into utterance text: "</span>" stop, request seed
/// drawn from `rng`, regenerated up to kEmptyResamples times when empty.
/// Errors: `failure` once every attempt came back empty.
std::string complete_utterance_text(const GenerationContext& ctx, const std::string& prompt,
                                    RngStream& rng, bool reply,
                                    ErrorCode failure = ErrorCode::kGenerationFailed);

/// A failure part-way through a thread. The code is the underlying cause.
class ThreadGenerationError : public Error {
 public:
  ThreadGenerationError(const Error& cause, std::optional<Thread> partial);
  const std::optional<Thread>& partial_thread() const noexcept { return partial_; }

 private:
  std::optional<Thread> partial_;
};

/// Errors: kOversizedDesign; kPostGenerationFailed after kEmptyResamples
/// regenerations; gateway errors propagate.
Utterance generate_post(const Persona& author, const GenerationContext& ctx, RngStream& rng,
                        std::string_view thread_id);

Thread generate_thread(const GenerationContext& ctx, std::span<const Persona> roster,
                       RngStream& rng, std::string thread_id);

/// Runs the reply loop from the end of `base`. With force_first_reply the
/// first continuation is generated without a coin flip.
Thread continue_thread(const GenerationContext& ctx, std::span<const Persona> roster,
                       Thread base, RngStream& rng, bool force_first_reply);

struct UniverseOptions {
  /// Grouping id for sibling universes. Default: design_id(design).
  std::string parent_community;
  Timestamp created_at{};
  /// Sampling temperature for every completion. Default: config.temperature.
  std::optional<double> temperature;
  std::string operation = "generate";
  std::size_t workers = 1;
  std::function<void(std::size_t done, std::size_t total)> on_progress;
};

class UniverseGenerationError : public Error {
 public:
  UniverseGenerationError(const Error& cause, Universe partial);
  const Universe& partial_universe() const noexcept { return partial_; }

 private:
  Universe partial_;
};

/// Expands personas then generates config.thread_count threads. Thread i
/// uses the stream derive_seed(config.rng_seed, i), so the result does not
/// depend on options.workers.
Universe generate_universe(const CommunityDesign& design, const GenerationConfig& config,
                           Gateway& gateway, const UniverseOptions& options = {});

std::string thread_id_for(std::string_view universe_id, std::size_t index);

}  // namespace simulacra
