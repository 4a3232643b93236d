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

#include <doctest.h>

#include <algorithm>
#include <unordered_set>

#include "helpers.hpp"
#include "simulacra/error.hpp"
#include "simulacra/persona_expander.hpp"

using namespace simulacra;
using simulacra::testing::psychotherapy_design;

namespace {

std::vector<Persona> first_n(std::size_t n) {
  auto seeds = psychotherapy_design().seed_personas;
  seeds.resize(n, seeds.front());
  return seeds;
}

std::size_t line_count(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

}  // namespace

TEST_CASE("parse_persona_lines") {
  const auto ps = parse_persona_lines(
      "Ana Ruiz, a nurse, runner and mother\n\nno comma here\n , missing name\nBo Kim,  teacher \n");
  REQUIRE(ps.size() == 2);
  CHECK(ps[0].name() == "Ana Ruiz");
  CHECK(ps[0].description() == "a nurse, runner and mother");
  CHECK(ps[1].description() == "teacher");
}

TEST_CASE("attempt budget is ceil(n / 5) * 4") {
  CHECK(expansion_attempt_budget(10) == 8);
  CHECK(expansion_attempt_budget(11) == 12);
  CHECK(expansion_attempt_budget(1000) == 800);
}

TEST_CASE("stalled expansion returns the partial roster") {
  auto backend = std::make_shared<ScriptedBackend>([](auto&, auto) {
    return CompletionResult{"Same Person, always the same\n", FinishReason::kStopSequence};
  });
  Gateway gw(backend, BackendConfig{});
  const auto seeds = first_n(5);
  try {
    expand_personas(seeds, 10, gw);
    FAIL("expected a stall");
  } catch (const ExpansionStalled& e) {
    CHECK(e.code() == ErrorCode::kExpansionStalled);
    CHECK(e.partial_roster().size() == 6);
    CHECK(e.partial_roster().back().name() == "Same Person");
  }
  CHECK(backend->calls() == expansion_attempt_budget(10));
}

TEST_CASE("requests use the expansion contract") {
  auto backend = std::make_shared<ScriptedBackend>([](auto&, std::size_t call) {
    if (call == 0) return CompletionResult{"   ", FinishReason::kStopSequence};
    return CompletionResult{"P" + std::to_string(call) + " X, a person\nP" + std::to_string(call) +
                                " Y, another\n",
                            FinishReason::kStopSequence};
  });
  auto audit = std::make_shared<AuditLog>();
  Gateway gw(backend, BackendConfig{}, audit);
  const auto roster = expand_personas(first_n(10), 40, gw, {0.7, 3});
  CHECK(roster.size() == 40);
  const auto reqs = backend->requests();
  CHECK(reqs[0].max_tokens == kExpansionMaxTokens);
  CHECK(reqs[0].stop == std::vector<std::string>{"\n\n"});
  CHECK(reqs[0].temperature == 0.7);
  CHECK(line_count(reqs[0].prompt) == 10);
  // The few-shot window never exceeds 25 lines and always ends with the
  // newest persona.
  for (const auto& r : reqs) CHECK(line_count(r.prompt) <= kExpansionWindow);
  CHECK(line_count(reqs.back().prompt) == kExpansionWindow);
  for (const auto& rec : audit->records()) CHECK(rec.operation == "expand_personas");
}

TEST_CASE("mock expansion: unique names, seeds first, deterministic") {
  const auto seeds = psychotherapy_design().seed_personas;
  auto gw = make_mock_gateway();
  const auto a = expand_personas(seeds, 200, *gw, {0.7, 42});
  const auto b = expand_personas(seeds, 200, *make_mock_gateway(), {0.7, 42});
  CHECK(a == b);
  REQUIRE(a.size() == 200);
  for (std::size_t i = 0; i < seeds.size(); ++i) CHECK(a[i] == seeds[i]);
  std::unordered_set<std::string> names;
  for (const auto& p : a) CHECK(names.insert(to_lower_ascii(p.name())).second);
  CHECK(expand_personas(seeds, 200, *gw, {0.7, 43}) != a);
}

TEST_CASE("expansion preconditions") {
  auto gw = make_mock_gateway();
  CHECK_THROWS_AS(expand_personas(first_n(5), 3, *gw), Error);
  CHECK(expand_personas(first_n(5), 5, *gw) == first_n(5));
  CHECK_THROWS_AS(expand_personas({}, 5, *gw), Error);
}
