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

#include "simulacra/model.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

namespace simulacra {

namespace {

void throw_if_any(std::vector<std::string> violations) {
  if (!violations.empty()) throw ValidationError(std::move(violations));
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

// ---------------------------------------------------------------- Persona

Persona::Persona(std::string name, std::string description)
    : name_(std::move(name)), description_(std::move(description)) {
  throw_if_any(check(name_, description_));
}

std::string_view Persona::first_name() const noexcept {
  const std::string_view n = name_;
  const auto space = n.find(' ');
  return space == std::string_view::npos ? n : n.substr(0, space);
}

std::vector<std::string> Persona::check(std::string_view name,
                                        std::string_view description) {
  std::vector<std::string> out;
  if (trim(name).empty()) out.emplace_back("persona name is empty");
  if (name.find('\n') != std::string_view::npos ||
      name.find('\r') != std::string_view::npos) {
    out.push_back("persona name contains a newline: " + std::string(name));
  }
  if (name.find(']') != std::string_view::npos) {
    out.push_back("persona name contains ']': " + std::string(name));
  }
  if (trim(description).empty()) {
    out.push_back("persona description is empty: " + std::string(name));
  }
  return out;
}

// ------------------------------------------------------------------- Rule

Rule::Rule(std::string text) : Rule(text, detect_polarity(text)) {}

Rule::Rule(std::string text, Polarity polarity)
    : text_(std::move(text)), polarity_(polarity) {
  if (trim(text_).empty()) throw ValidationError({"rule text is empty"});
}

Polarity Rule::detect_polarity(std::string_view text) {
  const auto t = trim(text);
  if (starts_with_ci(t, "no ") || starts_with_ci(t, "don't ")) {
    return Polarity::kRestrictive;
  }
  return Polarity::kPrescriptive;
}

// -------------------------------------------------------- CommunityDesign

std::vector<std::string> validate_design(const CommunityDesign& design) {
  std::vector<std::string> out;
  if (trim(design.goal).empty()) out.emplace_back("goal is empty");
  if (design.seed_personas.empty()) {
    out.emplace_back("seed_personas is empty");
  }
  std::set<std::string> seen;
  std::set<std::string> reported;
  for (const auto& p : design.seed_personas) {
    const auto key = to_lower_ascii(trim(p.name()));
    if (!seen.insert(key).second && reported.insert(key).second) {
      out.push_back("duplicate persona name: " + p.name());
    }
  }
  return out;
}

void require_valid(const CommunityDesign& design) {
  throw_if_any(validate_design(design));
}

std::string design_id(const CommunityDesign& design) {
  return "d-" + hex64(fnv1a64(Json(design).dump()));
}

// ------------------------------------------------------- GenerationConfig

std::vector<std::string> validate_config(const GenerationConfig& c) {
  std::vector<std::string> out;
  if (c.persona_pool_size == 0) out.emplace_back("persona_pool_size must be positive");
  if (!is_probability(c.reply_prob_mean)) {
    out.emplace_back("reply_prob_mean must lie in [0, 1]");
  }
  if (!(c.reply_prob_stdev >= 0.0)) {
    out.emplace_back("reply_prob_stdev must be non-negative");
  }
  if (!is_probability(c.new_persona_rate)) {
    out.emplace_back("new_persona_rate must lie in [0, 1]");
  }
  if (c.prompt_char_limit < kMinPromptCharLimit) {
    out.push_back("prompt_char_limit must be at least " +
                  std::to_string(kMinPromptCharLimit));
  }
  if (!(c.temperature >= 0.0)) out.emplace_back("temperature must be non-negative");
  if (!(c.multiverse_temperature >= 0.0)) {
    out.emplace_back("multiverse_temperature must be non-negative");
  }
  return out;
}

void require_valid(const GenerationConfig& config) {
  throw_if_any(validate_config(config));
}

// -------------------------------------------------------------- Utterance

std::string user_label(std::size_t number) {
  return "User " + std::to_string(number);
}

bool is_user_label(std::string_view author) {
  constexpr std::string_view prefix = "User ";
  if (author.size() <= prefix.size() || author.substr(0, prefix.size()) != prefix) {
    return false;
  }
  const auto digits = author.substr(prefix.size());
  return std::all_of(digits.begin(), digits.end(), [](char c) {
    return std::isdigit(static_cast<unsigned char>(c)) != 0;
  });
}

bool is_sentinel_author(std::string_view author) {
  return author == kModeratorLabel || is_user_label(author);
}

Utterance::Utterance(std::string id, std::string author, std::string text,
                     UtteranceKind kind, std::size_t index)
    : id_(std::move(id)),
      author_(std::move(author)),
      text_(std::move(text)),
      kind_(kind),
      index_(index) {
  throw_if_any(check(id_, author_, text_, kind_, index_));
}

std::vector<std::string> Utterance::check(std::string_view id,
                                          std::string_view author,
                                          std::string_view text,
                                          UtteranceKind kind,
                                          std::size_t index) {
  std::vector<std::string> out;
  if (id.empty()) out.emplace_back("utterance id is empty");
  if (trim(author).empty()) out.emplace_back("utterance author is empty");
  if (trim(text).empty()) out.emplace_back("utterance text is empty");
  if (text.find("</span>") != std::string_view::npos) {
    out.emplace_back("utterance text contains </span>");
  }
  if ((index == 0) != (kind == UtteranceKind::kPost)) {
    out.emplace_back("utterance index 0 must be exactly the post");
  }
  return out;
}

// ----------------------------------------------------------------- Thread

std::string utterance_id(std::string_view thread_id, std::size_t index) {
  return std::string(thread_id) + "-u" + std::to_string(index);
}

Thread::Thread(std::string id, std::vector<Utterance> utterances,
               std::optional<Provenance> provenance)
    : id_(std::move(id)),
      utterances_(std::move(utterances)),
      provenance_(std::move(provenance)) {
  auto violations = check(utterances_);
  if (id_.empty()) violations.insert(violations.begin(), "thread id is empty");
  throw_if_any(std::move(violations));
}

std::vector<std::string> Thread::check(const std::vector<Utterance>& utterances) {
  std::vector<std::string> out;
  if (utterances.empty()) {
    out.emplace_back("thread has no utterances");
    return out;
  }
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    const auto& u = utterances[i];
    if (u.index() != i) {
      out.push_back("utterance index " + std::to_string(u.index()) +
                    " at position " + std::to_string(i));
    }
    if (i > 0 && u.author() == utterances[i - 1].author()) {
      out.push_back("consecutive utterances by " + u.author() + " at index " +
                    std::to_string(i));
    }
  }
  return out;
}

void Thread::append(Utterance utterance) {
  if (utterance.index() != utterances_.size()) {
    throw ValidationError({"utterance index " + std::to_string(utterance.index()) +
                           " does not continue thread of length " +
                           std::to_string(utterances_.size())});
  }
  if (utterance.author() == utterances_.back().author()) {
    throw ValidationError({"consecutive utterances by " + utterance.author()});
  }
  utterances_.push_back(std::move(utterance));
}

Thread Thread::prefix(std::size_t through_index, std::string new_id,
                      std::optional<Provenance> provenance) const {
  if (through_index >= utterances_.size()) {
    throw Error(ErrorCode::kPrecondition, "prefix index out of range");
  }
  std::vector<Utterance> kept(utterances_.begin(),
                              utterances_.begin() + static_cast<std::ptrdiff_t>(through_index) + 1);
  return Thread(std::move(new_id), std::move(kept), std::move(provenance));
}

// --------------------------------------------------------------- Universe

std::vector<std::string> validate_universe(const Universe& u) {
  std::vector<std::string> out;
  if (u.id.empty()) out.emplace_back("universe id is empty");
  std::unordered_set<std::string> names;
  for (const auto& p : u.roster) {
    if (!names.insert(to_lower_ascii(p.name())).second) {
      out.push_back("duplicate roster name: " + p.name());
    }
  }
  if (u.roster.size() > u.config.persona_pool_size + u.design.seed_personas.size()) {
    out.emplace_back("roster exceeds persona_pool_size plus seed count");
  }
  std::unordered_set<std::string> thread_ids;
  for (const auto& t : u.threads) {
    if (!thread_ids.insert(t.id()).second) {
      out.push_back("duplicate thread id: " + t.id());
    }
    for (const auto& utt : t.utterances()) {
      if (!is_sentinel_author(utt.author()) &&
          find_persona(u.roster, utt.author()) == nullptr) {
        out.push_back("author not in roster: " + utt.author());
      }
    }
  }
  return out;
}

const Thread* find_thread(const Universe& universe, std::string_view thread_id) {
  for (const auto& t : universe.threads) {
    if (t.id() == thread_id) return &t;
  }
  return nullptr;
}

const Persona* find_persona(const std::vector<Persona>& roster,
                            std::string_view name) {
  for (const auto& p : roster) {
    if (p.name() == name) return &p;
  }
  return nullptr;
}

// -------------------------------------------------------------- Enum names

std::string_view to_string(Polarity p) {
  return p == Polarity::kRestrictive ? "restrictive" : "prescriptive";
}

std::string_view to_string(Ablation a) {
  switch (a) {
    case Ablation::kFull: return "full";
    case Ablation::kNoDescription: return "no_description";
    case Ablation::kNoPersonas: return "no_personas";
  }
  return "full";
}

std::string_view to_string(UtteranceKind k) {
  switch (k) {
    case UtteranceKind::kPost: return "post";
    case UtteranceKind::kReply: return "reply";
    case UtteranceKind::kIntervention: return "intervention";
  }
  return "reply";
}

std::string_view to_string(BranchKind k) {
  switch (k) {
    case BranchKind::kWhatIfReply: return "whatif_reply";
    case BranchKind::kWhatIfIntervention: return "whatif_intervention";
    case BranchKind::kMultiverseThread: return "multiverse_thread";
  }
  return "whatif_reply";
}

std::string_view to_string(FinishReason f) {
  switch (f) {
    case FinishReason::kStopSequence: return "stop_sequence";
    case FinishReason::kLength: return "length";
    case FinishReason::kOther: return "other";
  }
  return "other";
}

Polarity parse_polarity(std::string_view s) {
  if (s == "prescriptive") return Polarity::kPrescriptive;
  if (s == "restrictive") return Polarity::kRestrictive;
  throw ValidationError({"unknown rule polarity: " + std::string(s)});
}

Ablation parse_ablation(std::string_view s) {
  if (s == "full") return Ablation::kFull;
  if (s == "no_description" || s == "no-description") return Ablation::kNoDescription;
  if (s == "no_personas" || s == "no-personas") return Ablation::kNoPersonas;
  throw ValidationError({"unknown ablation: " + std::string(s)});
}

UtteranceKind parse_utterance_kind(std::string_view s) {
  if (s == "post") return UtteranceKind::kPost;
  if (s == "reply") return UtteranceKind::kReply;
  if (s == "intervention") return UtteranceKind::kIntervention;
  throw ValidationError({"unknown utterance kind: " + std::string(s)});
}

BranchKind parse_branch_kind(std::string_view s) {
  if (s == "whatif_reply") return BranchKind::kWhatIfReply;
  if (s == "whatif_intervention") return BranchKind::kWhatIfIntervention;
  if (s == "multiverse_thread") return BranchKind::kMultiverseThread;
  throw ValidationError({"unknown branch kind: " + std::string(s)});
}

FinishReason parse_finish_reason(std::string_view s) {
  if (s == "stop_sequence") return FinishReason::kStopSequence;
  if (s == "length") return FinishReason::kLength;
  return FinishReason::kOther;
}

// -------------------------------------------------------------------- JSON

namespace {

std::string string_field(const Json& j, const char* key,
                         std::vector<std::string>& violations) {
  if (!j.is_object() || !j.contains(key)) {
    violations.push_back(std::string("missing field: ") + key);
    return {};
  }
  if (!j.at(key).is_string()) {
    violations.push_back(std::string("field is not a string: ") + key);
    return {};
  }
  return j.at(key).get<std::string>();
}

}  // namespace

std::optional<CommunityDesign> parse_design(const Json& j,
                                            std::vector<std::string>& violations) {
  const auto before = violations.size();
  if (!j.is_object()) {
    violations.emplace_back("design is not a JSON object");
    return std::nullopt;
  }
  CommunityDesign design;
  design.goal = string_field(j, "goal", violations);

  if (j.contains("rules")) {
    if (!j.at("rules").is_array()) {
      violations.emplace_back("rules is not an array");
    } else {
      for (const auto& r : j.at("rules")) {
        try {
          design.rules.push_back(r.get<Rule>());
        } catch (const ValidationError& e) {
          violations.insert(violations.end(), e.violations().begin(),
                            e.violations().end());
        } catch (const nlohmann::json::exception&) {
          violations.emplace_back("malformed rule entry");
        }
      }
    }
  }

  if (!j.contains("seed_personas") || !j.at("seed_personas").is_array()) {
    violations.emplace_back("seed_personas is missing or not an array");
  } else {
    for (const auto& p : j.at("seed_personas")) {
      std::vector<std::string> local;
      const auto name = string_field(p, "name", local);
      const auto desc = string_field(p, "description", local);
      if (local.empty()) {
        auto v = Persona::check(name, desc);
        if (v.empty()) {
          design.seed_personas.emplace_back(name, desc);
        }
        local = std::move(v);
      }
      violations.insert(violations.end(), local.begin(), local.end());
    }
  }

  auto design_violations = validate_design(design);
  // An empty roster caused by bad entries is already reported above.
  if (violations.size() > before) {
    std::erase(design_violations, std::string("seed_personas is empty"));
  }
  violations.insert(violations.end(), design_violations.begin(),
                    design_violations.end());
  if (violations.size() > before) return std::nullopt;
  return design;
}

GenerationConfig merge_config(const GenerationConfig& base, const Json& overrides) {
  GenerationConfig c = base;
  if (overrides.is_null()) return c;
  if (!overrides.is_object()) {
    throw ValidationError({"config overrides must be a JSON object"});
  }
  std::vector<std::string> unknown;
  try {
    for (const auto& [key, value] : overrides.items()) {
      if (key == "persona_pool_size") c.persona_pool_size = value.get<std::size_t>();
      else if (key == "seed_persona_count_hint") c.seed_persona_count_hint = value.get<std::size_t>();
      else if (key == "thread_count") c.thread_count = value.get<std::size_t>();
      else if (key == "reply_prob_mean") c.reply_prob_mean = value.get<double>();
      else if (key == "reply_prob_stdev") c.reply_prob_stdev = value.get<double>();
      else if (key == "max_replies") c.max_replies = value.get<std::size_t>();
      else if (key == "new_persona_rate") c.new_persona_rate = value.get<double>();
      else if (key == "prompt_char_limit") c.prompt_char_limit = value.get<std::size_t>();
      else if (key == "temperature") c.temperature = value.get<double>();
      else if (key == "multiverse_temperature") c.multiverse_temperature = value.get<double>();
      else if (key == "ablation") c.ablation = parse_ablation(value.get<std::string>());
      else if (key == "rng_seed") c.rng_seed = value.get<std::uint64_t>();
      else unknown.push_back("unknown config field: " + key);
    }
  } catch (const nlohmann::json::exception& e) {
    unknown.push_back(std::string("malformed config field: ") + e.what());
  }
  throw_if_any(std::move(unknown));
  require_valid(c);
  return c;
}

}  // namespace simulacra

namespace nlohmann {

using simulacra::Json;

void adl_serializer<simulacra::Persona>::to_json(json& j, const simulacra::Persona& v) {
  j = json{{"name", v.name()}, {"description", v.description()}};
}
simulacra::Persona adl_serializer<simulacra::Persona>::from_json(const json& j) {
  return simulacra::Persona(j.at("name").get<std::string>(),
                            j.at("description").get<std::string>());
}

void adl_serializer<simulacra::Rule>::to_json(json& j, const simulacra::Rule& v) {
  j = json{{"text", v.text()}, {"polarity", simulacra::to_string(v.polarity())}};
}
simulacra::Rule adl_serializer<simulacra::Rule>::from_json(const json& j) {
  if (j.is_string()) return simulacra::Rule(j.get<std::string>());
  auto text = j.at("text").get<std::string>();
  if (j.contains("polarity") && !j.at("polarity").is_null()) {
    return simulacra::Rule(std::move(text),
                           simulacra::parse_polarity(j.at("polarity").get<std::string>()));
  }
  return simulacra::Rule(std::move(text));
}

void adl_serializer<simulacra::CommunityDesign>::to_json(
    json& j, const simulacra::CommunityDesign& v) {
  j = json{{"goal", v.goal}, {"rules", v.rules}, {"seed_personas", v.seed_personas}};
}
simulacra::CommunityDesign adl_serializer<simulacra::CommunityDesign>::from_json(
    const json& j) {
  std::vector<std::string> violations;
  auto design = simulacra::parse_design(j, violations);
  if (!design) throw simulacra::ValidationError(std::move(violations));
  return *design;
}

void adl_serializer<simulacra::GenerationConfig>::to_json(
    json& j, const simulacra::GenerationConfig& c) {
  j = json{{"persona_pool_size", c.persona_pool_size},
           {"seed_persona_count_hint", c.seed_persona_count_hint},
           {"thread_count", c.thread_count},
           {"reply_prob_mean", c.reply_prob_mean},
           {"reply_prob_stdev", c.reply_prob_stdev},
           {"max_replies", c.max_replies},
           {"new_persona_rate", c.new_persona_rate},
           {"prompt_char_limit", c.prompt_char_limit},
           {"temperature", c.temperature},
           {"multiverse_temperature", c.multiverse_temperature},
           {"ablation", simulacra::to_string(c.ablation)},
           {"rng_seed", c.rng_seed}};
}
simulacra::GenerationConfig adl_serializer<simulacra::GenerationConfig>::from_json(
    const json& j) {
  return simulacra::merge_config(simulacra::GenerationConfig{}, j);
}

void adl_serializer<simulacra::Utterance>::to_json(json& j, const simulacra::Utterance& v) {
  j = json{{"id", v.id()},
           {"author", v.author()},
           {"text", v.text()},
           {"kind", simulacra::to_string(v.kind())},
           {"index", v.index()}};
}
simulacra::Utterance adl_serializer<simulacra::Utterance>::from_json(const json& j) {
  return simulacra::Utterance(
      j.at("id").get<std::string>(), j.at("author").get<std::string>(),
      j.at("text").get<std::string>(),
      simulacra::parse_utterance_kind(j.at("kind").get<std::string>()),
      j.at("index").get<std::size_t>());
}

void adl_serializer<simulacra::Provenance>::to_json(json& j, const simulacra::Provenance& v) {
  j = json{{"source_universe", v.source_universe},
           {"source_thread", v.source_thread},
           {"kind", simulacra::to_string(v.kind)},
           {"branch_index", v.branch_index},
           {"at_utterance_index", v.at_utterance_index},
           {"spec", v.spec}};
}
simulacra::Provenance adl_serializer<simulacra::Provenance>::from_json(const json& j) {
  simulacra::Provenance p;
  p.source_universe = j.at("source_universe").get<std::string>();
  p.source_thread = j.at("source_thread").get<std::string>();
  p.kind = simulacra::parse_branch_kind(j.at("kind").get<std::string>());
  p.branch_index = j.at("branch_index").get<std::size_t>();
  p.at_utterance_index = j.at("at_utterance_index").get<std::size_t>();
  p.spec = j.value("spec", json::object());
  return p;
}

void adl_serializer<simulacra::Thread>::to_json(json& j, const simulacra::Thread& v) {
  j = json{{"id", v.id()}, {"utterances", v.utterances()}};
  if (v.provenance()) j["provenance"] = *v.provenance();
}
simulacra::Thread adl_serializer<simulacra::Thread>::from_json(const json& j) {
  std::optional<simulacra::Provenance> provenance;
  if (j.contains("provenance") && !j.at("provenance").is_null()) {
    provenance = j.at("provenance").get<simulacra::Provenance>();
  }
  return simulacra::Thread(j.at("id").get<std::string>(),
                           j.at("utterances").get<std::vector<simulacra::Utterance>>(),
                           std::move(provenance));
}

void adl_serializer<simulacra::Universe>::to_json(json& j, const simulacra::Universe& v) {
  j = json{{"id", v.id},
           {"design", v.design},
           {"config", v.config},
           {"roster", v.roster},
           {"threads", v.threads},
           {"parent_community", v.parent_community},
           {"created_at", simulacra::format_timestamp(v.created_at)}};
}
simulacra::Universe adl_serializer<simulacra::Universe>::from_json(const json& j) {
  simulacra::Universe u;
  u.id = j.at("id").get<std::string>();
  u.design = j.at("design").get<simulacra::CommunityDesign>();
  u.config = j.at("config").get<simulacra::GenerationConfig>();
  u.roster = j.at("roster").get<std::vector<simulacra::Persona>>();
  u.threads = j.at("threads").get<std::vector<simulacra::Thread>>();
  u.parent_community = j.at("parent_community").get<std::string>();
  u.created_at = simulacra::parse_timestamp(j.at("created_at").get<std::string>());
  auto violations = simulacra::validate_universe(u);
  if (!violations.empty()) throw simulacra::ValidationError(std::move(violations));
  return u;
}

void adl_serializer<simulacra::CompletionRequest>::to_json(
    json& j, const simulacra::CompletionRequest& v) {
  j = json{{"prompt", v.prompt},
           {"temperature", v.temperature},
           {"max_tokens", v.max_tokens},
           {"stop", v.stop}};
  if (v.seed) j["seed"] = *v.seed;
}
simulacra::CompletionRequest adl_serializer<simulacra::CompletionRequest>::from_json(
    const json& j) {
  simulacra::CompletionRequest r;
  r.prompt = j.at("prompt").get<std::string>();
  r.temperature = j.value("temperature", 0.7);
  r.max_tokens = j.value("max_tokens", std::size_t{256});
  r.stop = j.value("stop", std::vector<std::string>{});
  if (j.contains("seed") && !j.at("seed").is_null()) r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

void adl_serializer<simulacra::CompletionResult>::to_json(
    json& j, const simulacra::CompletionResult& v) {
  j = json{{"text", v.text}, {"finish_reason", simulacra::to_string(v.finish_reason)}};
}
simulacra::CompletionResult adl_serializer<simulacra::CompletionResult>::from_json(
    const json& j) {
  return {j.at("text").get<std::string>(),
          simulacra::parse_finish_reason(j.at("finish_reason").get<std::string>())};
}

}  // namespace nlohmann
