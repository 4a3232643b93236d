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

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "simulacra/gateway.hpp"
#include "simulacra/model.hpp"

namespace simulacra {

/// Few-shot examples shown per expansion request: the most recent entries.
inline constexpr std::size_t kExpansionWindow = 25;

/// Stop sequence for expansion: a blank line ends a batch of persona lines.
inline constexpr std::string_view kExpansionStop = "\n\n";

/// "Name, description" per line; the first comma splits. Blank, comma-less
/// or otherwise invalid lines are skipped.
std::vector<Persona> parse_persona_lines(std::string_view raw);

/// Raised when the attempt budget runs out; carries what was collected.
class ExpansionStalled : public Error {
 public:
  ExpansionStalled(std::vector<Persona> partial, std::size_t target);
  const std::vector<Persona>& partial_roster() const noexcept { return partial_; }

 private:
  std::vector<Persona> partial_;
};

struct ExpansionOptions {
  double temperature = 0.7;
  std::uint64_t seed = 0;
};

/// ceil(target / 5) * 4 completions.
std::size_t expansion_attempt_budget(std::size_t target_n);

/// Grows `seeds` to exactly target_n personas with case-insensitively
/// unique names. Seeds come first, in order. Errors: kPrecondition when
/// target_n < seeds.size(); ExpansionStalled when the budget runs out.
std::vector<Persona> expand_personas(std::span<const Persona> seeds, std::size_t target_n,
                                     Gateway& gateway, const ExpansionOptions& options = {});

}  // namespace simulacra
