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

#include "simulacra/prompt_forge.hpp"

#include <algorithm>

namespace simulacra {

namespace {

std::string negated(const Rule& rule, std::string_view neg) {
  std::string_view text = trim(rule.text());
  if (rule.polarity() == Polarity::kPrescriptive) return std::string(text);
  if (starts_with_ci(text, "no ")) {
    text.remove_prefix(3);
  } else if (starts_with_ci(text, "don't ")) {
    text.remove_prefix(6);
  }
  return std::string(neg) + " " + std::string(trim(text));
}

// Description as a sentence body: no trailing period, which the template adds.
std::string_view sentence_body(std::string_view text) {
  text = trim(text);
  while (!text.empty() && text.back() == '.') text.remove_suffix(1);
  return text;
}

PromptText finish(std::string body, TemplateKind kind, std::size_t dropped = 0) {
  PromptText p;
  p.char_count = char_length(body);
  p.body = std::move(body);
  p.template_kind = kind;
  p.truncated_utterance_count = dropped;
  return p;
}

bool describes_community(Ablation ablation) { return ablation != Ablation::kNoDescription; }

// "<subject> shares comments that are <rules>." or "" when nothing to say.
std::string rules_sentence(std::string_view subject, std::span<const Rule> rules,
                           Ablation ablation) {
  if (!describes_community(ablation) || rules.empty()) return {};
  return std::string(subject) + " shares comments that are " +
         render_rule_clause(rules, RuleStyle::kPersonaSentence) + ".";
}

std::string join_sentences(std::initializer_list<std::string_view> parts) {
  std::string out;
  for (const auto part : parts) {
    if (part.empty()) continue;
    if (!out.empty()) out += ' ';
    out += part;
  }
  return out;
}

// First paragraph of both templates. The reply template brackets the name.
std::string speaker_paragraph(const Speaker& speaker, std::span<const Rule> rules,
                              Ablation ablation, const PromptStyle& style, bool bracketed) {
  const std::string shown = bracketed ? "[" + speaker.label + "]" : speaker.label;
  const bool numbered = speaker.kind == Speaker::Kind::kNumbered || ablation == Ablation::kNoPersonas;
  if (numbered) {
    const auto sentence = rules_sentence(shown, rules, ablation);
    return sentence.empty() ? shown : sentence;
  }
  if (speaker.kind == Speaker::Kind::kInjected) {
    return shown + " " + std::string(sentence_body(speaker.description)) + ".";
  }
  const std::string intro = shown + " is " + std::string(sentence_body(speaker.description)) + ".";
  const std::string subject = style.pronoun ? *style.pronoun : std::string(speaker.short_name());
  return join_sentences({intro, rules_sentence(subject, rules, ablation)});
}

}  // namespace

std::string render_rule_clause(std::span<const Rule> rules, RuleStyle style,
                               std::optional<std::string_view> goal) {
  const std::string_view neg = style == RuleStyle::kTitleAttribute ? "NOT" : "not";
  std::string clause;
  for (const auto& rule : rules) {
    if (!clause.empty()) clause += ", ";
    clause += negated(rule, neg);
  }
  if (style == RuleStyle::kTitleAttribute && goal) {
    std::string about = "about " + std::string(trim(*goal));
    return clause.empty() ? about : about + ", and " + clause;
  }
  return clause;
}

Speaker Speaker::of(const Persona& persona) {
  return {Kind::kPersona, persona.name(), persona.description()};
}

Speaker Speaker::numbered(std::size_t n) { return {Kind::kNumbered, user_label(n), {}}; }

Speaker Speaker::injected(std::string label, std::string description) {
  return {Kind::kInjected, std::move(label), std::move(description)};
}

std::string_view Speaker::short_name() const {
  if (kind != Kind::kPersona) return label;
  const std::string_view n = label;
  return n.substr(0, n.find(' '));
}

PromptText build_persona_expansion_prompt(std::span<const Persona> seeds) {
  if (seeds.empty()) {
    throw Error(ErrorCode::kPrecondition, "persona expansion needs at least one seed");
  }
  std::string body;
  for (const auto& p : seeds) {
    body += p.name();
    body += ", ";
    body += p.description();
    body += '\n';
  }
  return finish(std::move(body), TemplateKind::kPersonaExpansion);
}

PromptText build_headline_prompt(const Speaker& speaker, const CommunityDesign& design,
                                 Ablation ablation, const PromptStyle& style,
                                 std::size_t char_limit) {
  const auto first = speaker_paragraph(speaker, design.rules, ablation, style, false);

  std::string second = std::string(speaker.short_name()) +
                       " posted the following headline to an online forum";
  std::string title = "comment";
  if (describes_community(ablation)) {
    second += " for " + std::string(trim(design.goal));
    std::span<const Rule> title_rules = design.rules;
    if (style.title_rule_limit) {
      title_rules = title_rules.first(std::min(*style.title_rule_limit, title_rules.size()));
    }
    const std::string topic = style.topic ? *style.topic : std::string(trim(design.goal));
    title = "comment that is " +
            render_rule_clause(title_rules, RuleStyle::kTitleAttribute, std::string_view(topic));
  }
  second += ": <span class=\"headline_reddit\" title=\"" + title + "\">";

  std::string body = first + "\n\n" + second;
  auto prompt = finish(std::move(body), TemplateKind::kHeadline);
  if (prompt.char_count > char_limit) {
    throw Error(ErrorCode::kOversizedDesign,
                "headline prompt needs " + std::to_string(prompt.char_count) +
                    " characters, limit is " + std::to_string(char_limit));
  }
  return prompt;
}

std::string render_thread_entry(const Utterance& u) {
  return "[" + u.author() + "]: <span class=\"comment\">\n\"" + u.text() + "\"</span>";
}

SerializedThread serialize_thread(std::span<const Utterance> utterances,
                                  std::size_t char_budget) {
  if (utterances.empty()) throw Error(ErrorCode::kPrecondition, "thread is empty");
  std::vector<std::string> entries;
  std::vector<std::size_t> lengths;
  entries.reserve(utterances.size());
  for (const auto& u : utterances) {
    entries.push_back(render_thread_entry(u));
    lengths.push_back(char_length(entries.back()));
  }
  // Entries are joined by one newline each.
  std::size_t total = 0;
  for (const auto len : lengths) total += len;
  total += lengths.size() - 1;

  std::size_t dropped = 0;
  while (total > char_budget && dropped + 1 < entries.size()) {
    total -= lengths[dropped] + 1;
    ++dropped;
  }
  if (total > char_budget) {
    throw Error(ErrorCode::kBudgetExhausted,
                "latest utterance needs " + std::to_string(total) +
                    " characters, budget is " + std::to_string(char_budget));
  }
  SerializedThread out;
  out.dropped = dropped;
  for (std::size_t i = dropped; i < entries.size(); ++i) {
    if (i > dropped) out.text += '\n';
    out.text += entries[i];
  }
  return out;
}

SerializedThread serialize_thread(const Thread& thread, std::size_t char_budget) {
  return serialize_thread(std::span<const Utterance>(thread.utterances()), char_budget);
}

PromptText build_reply_prompt(const Speaker& responder, std::span<const Utterance> thread,
                              const CommunityDesign& design, const GenerationConfig& config,
                              Ablation ablation, std::optional<std::string_view> title_override,
                              const PromptStyle& style) {
  const std::string head =
      "Current responder:\n" +
      speaker_paragraph(responder, design.rules, ablation, style, true) + "\n\n" +
      "The following thread was posted on online social media" +
      (describes_community(ablation) ? " for " + std::string(trim(design.goal)) : std::string()) +
      ".\nThread:\n";

  std::string title;
  if (title_override) {
    title = std::string(*title_override);
  } else if (describes_community(ablation) && !design.rules.empty()) {
    title = "comment that is " + render_rule_clause(design.rules, RuleStyle::kTitleAttribute);
  } else {
    title = "comment";
  }
  const std::string cue = "\n[" + responder.label +
                          "]: <span class=\"comment max_200_words\" title=\"" + title + "\">\"";

  const std::size_t fixed = char_length(head) + char_length(cue);
  if (fixed >= config.prompt_char_limit) {
    throw Error(ErrorCode::kBudgetExhausted,
                "reply template alone needs " + std::to_string(fixed) + " characters");
  }
  const auto serialized = serialize_thread(thread, config.prompt_char_limit - fixed);
  return finish(head + serialized.text + cue, TemplateKind::kReply, serialized.dropped);
}

std::string parse_completion(std::string_view raw) {
  std::string_view text = raw;
  if (const auto tag = text.find(kSpanClose); tag != std::string_view::npos) {
    text = text.substr(0, tag);
  }
  for (;;) {
    const auto before = text.size();
    text = trim(text);
    if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
      text = text.substr(1, text.size() - 2);
    }
    if (text.size() == before) break;
  }
  if (text.empty()) throw Error(ErrorCode::kEmptyGeneration, "completion is empty after parsing");
  return std::string(text);
}

std::string parse_reply_completion(std::string_view raw) {
  std::string_view text = raw;
  if (const auto tag = text.find(kSpanClose); tag != std::string_view::npos) {
    text = text.substr(0, tag);
  }
  text = trim(text);
  if (!text.empty() && text.back() == '"' && text.front() != '"') {
    return parse_completion("\"" + std::string(text));
  }
  return parse_completion(text);
}

std::string default_title_override(std::string_view description) {
  std::string_view d = sentence_body(description);
  if (starts_with_ci(d, "shares ")) d.remove_prefix(7);
  constexpr std::string_view suffix = " comments";
  if (d.size() > suffix.size() && to_lower_ascii(d.substr(d.size() - suffix.size())) == suffix) {
    d.remove_suffix(suffix.size());
  }
  d = trim(d);
  if (d.empty()) return "comment";
  return "comment that is " + std::string(d);
}

}  // namespace simulacra
