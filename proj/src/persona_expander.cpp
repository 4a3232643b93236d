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

#include "simulacra/persona_expander.hpp"

#include <unordered_set>

#include "simulacra/prompt_forge.hpp"
#include "simulacra/rng.hpp"

namespace simulacra {

std::vector<Persona> parse_persona_lines(std::string_view raw) {
  std::vector<Persona> out;
  while (!raw.empty()) {
    const auto nl = raw.find('\n');
    const auto line = trim(raw.substr(0, nl));
    raw = nl == std::string_view::npos ? std::string_view{} : raw.substr(nl + 1);

    const auto comma = line.find(',');
    if (comma == std::string_view::npos) continue;
    const auto name = trim(line.substr(0, comma));
    const auto description = trim(line.substr(comma + 1));
    if (!Persona::check(name, description).empty()) continue;
    out.emplace_back(std::string(name), std::string(description));
  }
  return out;
}

ExpansionStalled::ExpansionStalled(std::vector<Persona> partial, std::size_t target)
    : Error(ErrorCode::kExpansionStalled,
            "persona expansion stalled at " + std::to_string(partial.size()) + " of " +
                std::to_string(target)),
      partial_(std::move(partial)) {}

std::size_t expansion_attempt_budget(std::size_t target_n) {
  return (target_n + 4) / 5 * 4;
}

std::vector<Persona> expand_personas(std::span<const Persona> seeds, std::size_t target_n,
                                     Gateway& gateway, const ExpansionOptions& options) {
  if (seeds.empty()) throw Error(ErrorCode::kPrecondition, "no seed personas");
  if (target_n < seeds.size()) {
    throw Error(ErrorCode::kPrecondition, "target roster is smaller than the seed list");
  }

  std::vector<Persona> roster(seeds.begin(), seeds.end());
  std::unordered_set<std::string> names;
  for (const auto& p : roster) {
    if (!names.insert(to_lower_ascii(trim(p.name()))).second) {
      throw Error(ErrorCode::kPrecondition, "duplicate seed persona: " + p.name());
    }
  }

  const std::size_t budget = expansion_attempt_budget(target_n);
  for (std::size_t attempt = 0; roster.size() < target_n && attempt < budget; ++attempt) {
    const std::size_t window = std::min(kExpansionWindow, roster.size());
    const auto prompt = build_persona_expansion_prompt(
        std::span<const Persona>(roster).last(window));

    CompletionRequest request;
    request.prompt = prompt.body;
    request.temperature = options.temperature;
    request.max_tokens = kExpansionMaxTokens;
    request.stop = {std::string(kExpansionStop)};
    request.seed = derive_seed(options.seed, attempt);

    CompletionResult result;
    try {
      result = gateway.complete(request, "expand_personas");
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kEmptyGeneration) continue;
      throw;
    }

    for (auto& p : parse_persona_lines(result.text)) {
      if (roster.size() >= target_n) break;
      if (names.insert(to_lower_ascii(p.name())).second) roster.push_back(std::move(p));
    }
  }

  if (roster.size() < target_n) throw ExpansionStalled(std::move(roster), target_n);
  return roster;
}

}  // namespace simulacra
