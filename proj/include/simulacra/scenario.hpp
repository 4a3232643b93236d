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

// WhatIf and Multiverse. None of these mutate their inputs: every result is
// a new Thread or Universe carrying provenance back to its source.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "simulacra/gateway.hpp"
#include "simulacra/model.hpp"
#include "simulacra/thread_engine.hpp"

namespace simulacra {

/// A persona the designer drops into a conversation. A label that names a
/// roster member with no description selects that member instead.
struct InjectedPersona {
  std::string label;
  std::string description;

  bool operator==(const InjectedPersona&) const = default;
};

struct WhatIfSpec {
  std::string thread_id;
  std::size_t at_utterance_index = 0;
  std::optional<InjectedPersona> injected_persona;
  /// Full title attribute for the cue, e.g. "comment that is trolling".
  /// Default for free-text personas: derived from the description.
  std::optional<std::string> title_override;
  std::optional<std::string> intervention_text;
  std::size_t alternatives = 3;

  bool operator==(const WhatIfSpec&) const = default;
};

Json to_json(const WhatIfSpec& spec);
WhatIfSpec whatif_spec_from_json(const Json& j);

/// "Troll:shares trolling comments" -> {Troll, shares trolling comments}.
InjectedPersona parse_injected_persona(std::string_view text);

struct BranchFailure {
  std::size_t branch_index = 0;
  ErrorCode code = ErrorCode::kGenerationFailed;
  std::string message;
};

struct BranchResult {
  std::vector<Thread> threads;
  std::vector<BranchFailure> failures;
};

Json to_json(const BranchResult& result);

/// Truncates the thread after spec.at_utterance_index and generates
/// spec.alternatives replies from the injected persona at the standard
/// temperature. Errors: kNotFound for an unknown thread, kInvalidSpec for
/// a bad index or missing persona. Failed alternatives are reported in
/// the result; if every alternative fails the first error is rethrown.
BranchResult whatif_reply(const Universe& universe, const WhatIfSpec& spec, Gateway& gateway,
                          std::uint64_t seed);

/// Appends a Moderator utterance with spec.intervention_text after the
/// chosen utterance and generates spec.alternatives responses from that
/// utterance's author (or from spec.injected_persona when given).
BranchResult whatif_intervention(const Universe& universe, const WhatIfSpec& spec,
                                 Gateway& gateway, std::uint64_t seed);

struct MultiverseOptions {
  /// Seed for the new universe. Default: drawn from std::random_device.
  std::optional<std::uint64_t> seed;
  Timestamp created_at{};
  std::size_t workers = 1;
  std::function<void(std::size_t done, std::size_t total)> on_progress;
};

/// A fresh universe for the same design under community_id, sampled at
/// config.multiverse_temperature. The stored config differs from the input
/// only in rng_seed.
Universe multiverse_community(const std::string& community_id, const CommunityDesign& design,
                              const GenerationConfig& config, Gateway& gateway,
                              const MultiverseOptions& options = {});

/// k continuations from the chosen utterance, each with a fresh reply
/// probability and responder draws, at config.multiverse_temperature. Each
/// continuation contains at least one new utterance.
BranchResult multiverse_thread(const Universe& universe, const std::string& thread_id,
                               std::size_t at_utterance_index, std::size_t k, Gateway& gateway,
                               std::uint64_t seed);

}  // namespace simulacra
