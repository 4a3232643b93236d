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

#include "simulacra/scenario.hpp"

#include <exception>
#include <functional>
#include <random>

#include "simulacra/prompt_forge.hpp"
#include "simulacra/rng.hpp"

namespace simulacra {

namespace {

const Thread& lookup_thread(const Universe& universe, const std::string& thread_id) {
  const Thread* thread = find_thread(universe, thread_id);
  if (!thread) {
    throw Error(ErrorCode::kNotFound,
                "thread " + thread_id + " not found in universe " + universe.id);
  }
  return *thread;
}

void check_index(const Thread& thread, std::size_t at) {
  if (at >= thread.size()) {
    throw Error(ErrorCode::kInvalidSpec,
                "utterance index " + std::to_string(at) + " is out of range for thread " +
                    thread.id() + " (" + std::to_string(thread.size()) + " utterances)");
  }
}

void check_alternatives(std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidSpec, "at least one alternative is required");
}

std::string branch_id(const std::string& source, std::string_view tag, std::uint64_t seed,
                      std::size_t k) {
  return source + "-" + std::string(tag) + "-" + hex64(mix64(seed)).substr(0, 8) + "-" +
         std::to_string(k);
}

struct Responder {
  Speaker speaker;
  std::optional<std::string> title;
};

// A label that names a roster member and carries no description selects
// that member; anything else is a free-text persona.
Responder resolve_injected(const Universe& universe, const InjectedPersona& injected,
                           const std::optional<std::string>& title_override) {
  const auto label = trim(injected.label);
  if (label.empty()) throw Error(ErrorCode::kInvalidSpec, "injected persona has no label");
  if (label == kModeratorLabel) {
    throw Error(ErrorCode::kInvalidSpec, "the Moderator label is reserved");
  }
  if (trim(injected.description).empty()) {
    const Persona* member = find_persona(universe.roster, label);
    if (!member) {
      throw Error(ErrorCode::kInvalidSpec,
                  "persona " + std::string(label) + " is not in the roster and has no description");
    }
    return {Speaker::of(*member), title_override};
  }
  return {Speaker::injected(std::string(label), std::string(trim(injected.description))),
          title_override.value_or(default_title_override(injected.description))};
}

// The author of an existing utterance, as it would be shown in a prompt.
Speaker speaker_for_author(const Universe& universe, const std::string& author) {
  if (is_user_label(author)) return {Speaker::Kind::kNumbered, author, {}};
  if (const Persona* member = find_persona(universe.roster, author)) return Speaker::of(*member);
  return Speaker::injected(author, "shares comments");
}

// Runs each alternative independently. Failures are recorded; when none
// succeeds the first failure is rethrown.
BranchResult run_branches(std::size_t k, const std::function<Thread(std::size_t)>& make) {
  BranchResult result;
  std::exception_ptr first;
  for (std::size_t i = 0; i < k; ++i) {
    try {
      result.threads.push_back(make(i));
    } catch (const Error& e) {
      if (!first) first = std::current_exception();
      result.failures.push_back({i, e.code(), e.what()});
    }
  }
  if (result.threads.empty() && first) std::rethrow_exception(first);
  return result;
}

Provenance provenance_for(const Universe& universe, const Thread& source, BranchKind kind,
                          std::size_t k, std::size_t at, Json spec) {
  return {universe.id, source.id(), kind, k, at, std::move(spec)};
}

}  // namespace

Json to_json(const WhatIfSpec& spec) {
  Json j{{"thread_id", spec.thread_id},
         {"at_utterance_index", spec.at_utterance_index},
         {"alternatives", spec.alternatives}};
  if (spec.injected_persona) {
    j["injected_persona"] = {{"label", spec.injected_persona->label},
                             {"description", spec.injected_persona->description}};
  }
  if (spec.title_override) j["title_override"] = *spec.title_override;
  if (spec.intervention_text) j["intervention_text"] = *spec.intervention_text;
  return j;
}

WhatIfSpec whatif_spec_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidSpec, "whatif spec must be an object");
  WhatIfSpec spec;
  try {
    spec.thread_id = j.at("thread_id").get<std::string>();
    spec.at_utterance_index = j.at("at_utterance_index").get<std::size_t>();
    if (j.contains("alternatives")) spec.alternatives = j.at("alternatives").get<std::size_t>();
    if (j.contains("injected_persona") && !j.at("injected_persona").is_null()) {
      const auto& p = j.at("injected_persona");
      if (p.is_string()) {
        spec.injected_persona = parse_injected_persona(p.get<std::string>());
      } else {
        InjectedPersona injected;
        injected.label = p.contains("label") ? p.at("label").get<std::string>()
                                             : p.at("name").get<std::string>();
        injected.description = p.value("description", "");
        spec.injected_persona = std::move(injected);
      }
    }
    if (j.contains("title_override") && !j.at("title_override").is_null()) {
      spec.title_override = j.at("title_override").get<std::string>();
    }
    if (j.contains("intervention_text") && !j.at("intervention_text").is_null()) {
      spec.intervention_text = j.at("intervention_text").get<std::string>();
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec, std::string("malformed whatif spec: ") + e.what());
  }
  return spec;
}

InjectedPersona parse_injected_persona(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) return {std::string(trim(text)), {}};
  return {std::string(trim(text.substr(0, colon))), std::string(trim(text.substr(colon + 1)))};
}

Json to_json(const BranchResult& result) {
  Json failures = Json::array();
  for (const auto& f : result.failures) {
    failures.push_back({{"branch_index", f.branch_index},
                        {"code", error_code_name(f.code)},
                        {"message", f.message}});
  }
  return {{"threads", result.threads}, {"failures", failures}};
}

BranchResult whatif_reply(const Universe& universe, const WhatIfSpec& spec, Gateway& gateway,
                          std::uint64_t seed) {
  const Thread& source = lookup_thread(universe, spec.thread_id);
  check_index(source, spec.at_utterance_index);
  check_alternatives(spec.alternatives);
  if (!spec.injected_persona) {
    throw Error(ErrorCode::kInvalidSpec, "a reply what-if needs an injected persona");
  }
  const auto responder = resolve_injected(universe, *spec.injected_persona, spec.title_override);
  const auto& last_author = source.utterances()[spec.at_utterance_index].author();
  if (responder.speaker.label == last_author) {
    throw Error(ErrorCode::kInvalidSpec,
                responder.speaker.label + " wrote the chosen utterance and cannot reply to it");
  }

  GenerationContext ctx{universe.design, universe.config, gateway, universe.config.temperature,
                        "whatif_reply"};
  const Json spec_json = to_json(spec);
  return run_branches(spec.alternatives, [&](std::size_t k) {
    Thread branch = source.prefix(
        spec.at_utterance_index, branch_id(source.id(), "wr", seed, k),
        provenance_for(universe, source, BranchKind::kWhatIfReply, k, spec.at_utterance_index,
                       spec_json));
    RngStream rng(derive_seed(seed, k));
    const auto prompt =
        build_reply_prompt(responder.speaker, branch.utterances(), universe.design,
                           universe.config, universe.config.ablation, responder.title);
    auto text = complete_utterance_text(ctx, prompt.body, rng, true);
    const std::size_t index = branch.size();
    branch.append(Utterance(utterance_id(branch.id(), index), responder.speaker.label,
                            std::move(text), UtteranceKind::kReply, index));
    return branch;
  });
}

BranchResult whatif_intervention(const Universe& universe, const WhatIfSpec& spec,
                                 Gateway& gateway, std::uint64_t seed) {
  const Thread& source = lookup_thread(universe, spec.thread_id);
  check_index(source, spec.at_utterance_index);
  check_alternatives(spec.alternatives);
  if (!spec.intervention_text || trim(*spec.intervention_text).empty()) {
    throw Error(ErrorCode::kInvalidSpec, "an intervention needs non-empty text");
  }
  const auto& probed = source.utterances()[spec.at_utterance_index];
  if (probed.author() == kModeratorLabel) {
    throw Error(ErrorCode::kInvalidSpec, "the chosen utterance is already by the Moderator");
  }
  const Responder responder =
      spec.injected_persona
          ? resolve_injected(universe, *spec.injected_persona, spec.title_override)
          : Responder{speaker_for_author(universe, probed.author()), spec.title_override};

  GenerationContext ctx{universe.design, universe.config, gateway, universe.config.temperature,
                        "whatif_intervention"};
  const Json spec_json = to_json(spec);
  const std::string intervention(trim(*spec.intervention_text));
  return run_branches(spec.alternatives, [&](std::size_t k) {
    Thread branch = source.prefix(
        spec.at_utterance_index, branch_id(source.id(), "wi", seed, k),
        provenance_for(universe, source, BranchKind::kWhatIfIntervention, k,
                       spec.at_utterance_index, spec_json));
    std::size_t index = branch.size();
    branch.append(Utterance(utterance_id(branch.id(), index), std::string(kModeratorLabel),
                            intervention, UtteranceKind::kIntervention, index));
    RngStream rng(derive_seed(seed, k));
    const auto prompt =
        build_reply_prompt(responder.speaker, branch.utterances(), universe.design,
                           universe.config, universe.config.ablation, responder.title);
    auto text = complete_utterance_text(ctx, prompt.body, rng, true);
    index = branch.size();
    branch.append(Utterance(utterance_id(branch.id(), index), responder.speaker.label,
                            std::move(text), UtteranceKind::kReply, index));
    return branch;
  });
}

Universe multiverse_community(const std::string& community_id, const CommunityDesign& design,
                              const GenerationConfig& config, Gateway& gateway,
                              const MultiverseOptions& options) {
  GenerationConfig fresh = config;
  if (options.seed) {
    fresh.rng_seed = *options.seed;
  } else {
    std::random_device device;
    fresh.rng_seed = (static_cast<std::uint64_t>(device()) << 32) ^ device();
  }
  UniverseOptions opts;
  opts.parent_community = community_id;
  opts.created_at = options.created_at;
  opts.temperature = config.multiverse_temperature;
  opts.operation = "multiverse_community";
  opts.workers = options.workers;
  opts.on_progress = options.on_progress;
  return generate_universe(design, fresh, gateway, opts);
}

BranchResult multiverse_thread(const Universe& universe, const std::string& thread_id,
                               std::size_t at_utterance_index, std::size_t k, Gateway& gateway,
                               std::uint64_t seed) {
  const Thread& source = lookup_thread(universe, thread_id);
  check_index(source, at_utterance_index);
  check_alternatives(k);
  // Replies in the kept prefix: everything after the post.
  if (at_utterance_index >= universe.config.max_replies) {
    throw Error(ErrorCode::kInvalidSpec,
                "the prefix already holds the maximum number of replies");
  }

  GenerationContext ctx{universe.design, universe.config, gateway,
                        universe.config.multiverse_temperature, "multiverse_thread"};
  const Json spec_json{{"thread_id", thread_id},
                       {"at_utterance_index", at_utterance_index},
                       {"alternatives", k}};
  return run_branches(k, [&](std::size_t i) {
    Thread base = source.prefix(
        at_utterance_index, branch_id(source.id(), "mv", seed, i),
        provenance_for(universe, source, BranchKind::kMultiverseThread, i, at_utterance_index,
                       spec_json));
    RngStream rng(derive_seed(seed, i));
    return continue_thread(ctx, universe.roster, std::move(base), rng, true);
  });
}

}  // namespace simulacra
