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

// Prompt construction and completion parsing. Everything here is a pure
// function of its arguments.
//
// Whitespace policy: sentences within a paragraph are joined by a single
// space, paragraphs are separated by "\n\n", and label lines ("Current
// responder:", "Thread:") and thread entries are separated by "\n".
//
// Lengths are counted in Unicode code points.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "simulacra/model.hpp"

namespace simulacra {

enum class TemplateKind { kPersonaExpansion, kHeadline, kReply };

struct PromptText {
  std::string body;
  std::size_t char_count = 0;
  TemplateKind template_kind = TemplateKind::kHeadline;
  std::size_t truncated_utterance_count = 0;
};

enum class RuleStyle { kPersonaSentence, kTitleAttribute };

/// persona_sentence: "not encouraging suicide, not anti-therapy"
/// title_attribute:  "NOT encouraging suicide, NOT anti-therapy", prefixed
///                   by "about <goal>, and " when a goal is given.
/// A restrictive rule loses its leading "no " / "don't " before negation;
/// prescriptive rules are rendered verbatim.
std::string render_rule_clause(std::span<const Rule> rules, RuleStyle style,
                               std::optional<std::string_view> goal = std::nullopt);

/// Who a prompt speaks for.
struct Speaker {
  enum class Kind {
    kPersona,   // "[Name] is <description>."
    kNumbered,  // "User N", no description (no_personas ablation)
    kInjected,  // free-text WhatIf persona: "[Troll] shares trolling comments."
  };

  Kind kind = Kind::kPersona;
  std::string label;
  std::string description;

  static Speaker of(const Persona& persona);
  static Speaker numbered(std::size_t n);
  static Speaker injected(std::string label, std::string description);

  /// Name used to open the second headline paragraph: the first name for
  /// personas, the whole label otherwise.
  std::string_view short_name() const;
};

/// Rendering overrides. Defaults follow the engine's policy; the overrides
/// exist so specific published prompt wordings can be reproduced exactly.
struct PromptStyle {
  /// Subject of "<x> shares comments that are ...". Default: first name.
  std::optional<std::string> pronoun;
  /// Topic after "comment that is about". Default: the whole goal.
  std::optional<std::string> topic;
  /// Use only the first N rules in the headline title attribute.
  std::optional<std::size_t> title_rule_limit;
};

PromptText build_persona_expansion_prompt(std::span<const Persona> seeds);

/// Errors: kOversizedDesign when the prompt exceeds char_limit.
PromptText build_headline_prompt(const Speaker& speaker, const CommunityDesign& design,
                                 Ablation ablation, const PromptStyle& style = {},
                                 std::size_t char_limit = 8000);

struct SerializedThread {
  std::string text;
  std::size_t dropped = 0;
};

std::string render_thread_entry(const Utterance& utterance);

/// Renders utterances oldest first, dropping from the front until the text
/// fits char_budget. The most recent utterance is never dropped.
/// Errors: kBudgetExhausted when even the latest utterance does not fit.
SerializedThread serialize_thread(std::span<const Utterance> utterances,
                                  std::size_t char_budget);
SerializedThread serialize_thread(const Thread& thread, std::size_t char_budget);

/// Errors: kBudgetExhausted when the thread cannot be made to fit.
PromptText build_reply_prompt(const Speaker& responder, std::span<const Utterance> thread,
                              const CommunityDesign& design, const GenerationConfig& config,
                              Ablation ablation,
                              std::optional<std::string_view> title_override = std::nullopt,
                              const PromptStyle& style = {});

/// Everything from the first "</span>" on is discarded, then matching
/// outer double quotes are stripped and whitespace trimmed until nothing
/// changes. Errors: kEmptyGeneration when nothing remains.
std::string parse_completion(std::string_view raw);

/// As parse_completion, for completions of a reply cue. The cue already
/// opened the quote, so a body that only closes it is balanced first.
std::string parse_reply_completion(std::string_view raw);

/// "shares trolling comments" -> "comment that is trolling".
std::string default_title_override(std::string_view description);

}  // namespace simulacra
