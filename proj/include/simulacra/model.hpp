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

// Domain types shared by every module. Types with invariants validate in
// their constructors and throw ValidationError; everything here is an
// immutable value once built, so snapshots can be shared across threads.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "simulacra/error.hpp"
#include "simulacra/util.hpp"

namespace simulacra {

using Json = nlohmann::json;

/// Closing tag that ends every generated post and reply.
inline constexpr std::string_view kSpanClose = "</span>";

// ---------------------------------------------------------------- Persona

class Persona {
 public:
  Persona(std::string name, std::string description);

  const std::string& name() const noexcept { return name_; }
  const std::string& description() const noexcept { return description_; }

  /// Text before the first space; single-word names come back unchanged.
  std::string_view first_name() const noexcept;

  /// Violations the constructor would raise for these fields.
  static std::vector<std::string> check(std::string_view name,
                                        std::string_view description);

  bool operator==(const Persona&) const = default;

 private:
  std::string name_;
  std::string description_;
};

// ------------------------------------------------------------------- Rule

enum class Polarity { kPrescriptive, kRestrictive };

class Rule {
 public:
  /// Polarity is auto-detected: a leading "no " or "don't " is restrictive.
  explicit Rule(std::string text);
  Rule(std::string text, Polarity polarity);

  const std::string& text() const noexcept { return text_; }
  Polarity polarity() const noexcept { return polarity_; }

  static Polarity detect_polarity(std::string_view text);

  bool operator==(const Rule&) const = default;

 private:
  std::string text_;
  Polarity polarity_;
};

// -------------------------------------------------------- CommunityDesign

/// Designer input. Kept as a plain aggregate so that drafts with problems
/// can be represented and reported by validate_design().
struct CommunityDesign {
  std::string goal;
  std::vector<Rule> rules;
  std::vector<Persona> seed_personas;

  bool operator==(const CommunityDesign&) const = default;
};

std::vector<std::string> validate_design(const CommunityDesign& design);

/// Throws ValidationError when validate_design reports anything.
void require_valid(const CommunityDesign& design);

/// Content-derived identifier ("d-" + hash of the canonical JSON).
std::string design_id(const CommunityDesign& design);

// ------------------------------------------------------- GenerationConfig

enum class Ablation { kFull, kNoDescription, kNoPersonas };

inline constexpr std::size_t kMinPromptCharLimit = 1000;

struct GenerationConfig {
  std::size_t persona_pool_size = 1000;
  std::size_t seed_persona_count_hint = 10;
  std::size_t thread_count = 20;
  double reply_prob_mean = 0.65;
  double reply_prob_stdev = 0.10;
  std::size_t max_replies = 8;
  double new_persona_rate = 0.5;
  std::size_t prompt_char_limit = 8000;
  double temperature = 0.7;
  double multiverse_temperature = 0.8;
  Ablation ablation = Ablation::kFull;
  std::uint64_t rng_seed = 0;

  bool operator==(const GenerationConfig&) const = default;
};

std::vector<std::string> validate_config(const GenerationConfig& config);
void require_valid(const GenerationConfig& config);

// -------------------------------------------------------------- Utterance

enum class UtteranceKind { kPost, kReply, kIntervention };

inline constexpr std::string_view kModeratorLabel = "Moderator";

/// "User N" labels stand in for personas under the no_personas ablation.
std::string user_label(std::size_t number);
bool is_user_label(std::string_view author);
bool is_sentinel_author(std::string_view author);

class Utterance {
 public:
  Utterance(std::string id, std::string author, std::string text,
            UtteranceKind kind, std::size_t index);

  const std::string& id() const noexcept { return id_; }
  const std::string& author() const noexcept { return author_; }
  const std::string& text() const noexcept { return text_; }
  UtteranceKind kind() const noexcept { return kind_; }
  std::size_t index() const noexcept { return index_; }

  static std::vector<std::string> check(std::string_view id,
                                        std::string_view author,
                                        std::string_view text,
                                        UtteranceKind kind, std::size_t index);

  bool operator==(const Utterance&) const = default;

 private:
  std::string id_;
  std::string author_;
  std::string text_;
  UtteranceKind kind_;
  std::size_t index_;
};

// ----------------------------------------------------------------- Thread

enum class BranchKind { kWhatIfReply, kWhatIfIntervention, kMultiverseThread };

/// Where a branch thread came from.
struct Provenance {
  std::string source_universe;
  std::string source_thread;
  BranchKind kind = BranchKind::kWhatIfReply;
  std::size_t branch_index = 0;
  std::size_t at_utterance_index = 0;
  Json spec = Json::object();

  bool operator==(const Provenance&) const = default;
};

class Thread {
 public:
  Thread(std::string id, std::vector<Utterance> utterances,
         std::optional<Provenance> provenance = std::nullopt);

  const std::string& id() const noexcept { return id_; }
  const std::vector<Utterance>& utterances() const noexcept {
    return utterances_;
  }
  std::size_t size() const noexcept { return utterances_.size(); }
  const Utterance& back() const { return utterances_.back(); }
  const std::optional<Provenance>& provenance() const noexcept {
    return provenance_;
  }

  /// Appends after checking index contiguity, kind and author alternation.
  void append(Utterance utterance);

  /// Copy of utterances [0, through_index] under a new id.
  Thread prefix(std::size_t through_index, std::string new_id,
                std::optional<Provenance> provenance = std::nullopt) const;

  static std::vector<std::string> check(const std::vector<Utterance>& utterances);

  bool operator==(const Thread&) const = default;

 private:
  std::string id_;
  std::vector<Utterance> utterances_;
  std::optional<Provenance> provenance_;
};

std::string utterance_id(std::string_view thread_id, std::size_t index);

// --------------------------------------------------------------- Universe

struct Universe {
  std::string id;
  CommunityDesign design;
  GenerationConfig config;
  std::vector<Persona> roster;
  std::vector<Thread> threads;
  std::string parent_community;
  Timestamp created_at{};

  bool operator==(const Universe&) const = default;
};

std::vector<std::string> validate_universe(const Universe& universe);

const Thread* find_thread(const Universe& universe, std::string_view thread_id);
const Persona* find_persona(const std::vector<Persona>& roster,
                            std::string_view name);

// ----------------------------------------------------- Completion contract

enum class FinishReason { kStopSequence, kLength, kOther };

struct CompletionRequest {
  std::string prompt;
  double temperature = 0.7;
  std::size_t max_tokens = 256;
  std::vector<std::string> stop;
  /// Sampling seed. The mock backend always honors it; the HTTP backend
  /// forwards it only when configured to.
  std::optional<std::uint64_t> seed;

  bool operator==(const CompletionRequest&) const = default;
};

struct CompletionResult {
  std::string text;
  FinishReason finish_reason = FinishReason::kOther;

  bool operator==(const CompletionResult&) const = default;
};

// -------------------------------------------------------------- Enum names

std::string_view to_string(Polarity p);
std::string_view to_string(Ablation a);
std::string_view to_string(UtteranceKind k);
std::string_view to_string(BranchKind k);
std::string_view to_string(FinishReason f);

Polarity parse_polarity(std::string_view s);
Ablation parse_ablation(std::string_view s);  // accepts '-' or '_'
UtteranceKind parse_utterance_kind(std::string_view s);
BranchKind parse_branch_kind(std::string_view s);
FinishReason parse_finish_reason(std::string_view s);

// -------------------------------------------------------------------- JSON

/// Parses a design, collecting every violation (malformed fields, persona
/// and rule invariants, design invariants) instead of stopping at the first.
std::optional<CommunityDesign> parse_design(const Json& j,
                                            std::vector<std::string>& violations);

/// Applies the fields present in `overrides` on top of `base`.
GenerationConfig merge_config(const GenerationConfig& base, const Json& overrides);

}  // namespace simulacra

namespace nlohmann {

#define SIMULACRA_JSON_SERIALIZER(T)            \
  template <>                                   \
  struct adl_serializer<simulacra::T> {         \
    static void to_json(json& j, const simulacra::T& v); \
    static simulacra::T from_json(const json& j);        \
  };

SIMULACRA_JSON_SERIALIZER(Persona)
SIMULACRA_JSON_SERIALIZER(Rule)
SIMULACRA_JSON_SERIALIZER(CommunityDesign)
SIMULACRA_JSON_SERIALIZER(GenerationConfig)
SIMULACRA_JSON_SERIALIZER(Utterance)
SIMULACRA_JSON_SERIALIZER(Provenance)
SIMULACRA_JSON_SERIALIZER(Thread)
SIMULACRA_JSON_SERIALIZER(Universe)
SIMULACRA_JSON_SERIALIZER(CompletionRequest)
SIMULACRA_JSON_SERIALIZER(CompletionResult)

#undef SIMULACRA_JSON_SERIALIZER

}  // namespace nlohmann
