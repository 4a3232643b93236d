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

#include <set>

#include "helpers.hpp"
#include "simulacra/error.hpp"
#include "simulacra/scenario.hpp"

using namespace simulacra;
using simulacra::testing::psychotherapy_design;
using simulacra::testing::small_config;

namespace {

const Universe& base_universe() {
  static const Universe u = [] {
    GenerationConfig c = small_config(21, 6, 30);
    c.reply_prob_mean = 0.9;
    return generate_universe(psychotherapy_design(), c, *make_mock_gateway());
  }();
  return u;
}

const Thread& longest_thread() {
  const auto& ts = base_universe().threads;
  return *std::max_element(ts.begin(), ts.end(),
                           [](const Thread& a, const Thread& b) { return a.size() < b.size(); });
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

WhatIfSpec troll_spec(std::size_t at) {
  WhatIfSpec s;
  s.thread_id = longest_thread().id();
  s.at_utterance_index = at;
  s.injected_persona = InjectedPersona{"Troll", "shares trolling comments"};
  return s;
}

}  // namespace

TEST_CASE("injected persona parsing") {
  CHECK(parse_injected_persona("Troll:shares trolling comments") ==
        InjectedPersona{"Troll", "shares trolling comments"});
  CHECK(parse_injected_persona(" Tom Cheng ") == InjectedPersona{"Tom Cheng", ""});
}

TEST_CASE("whatif spec JSON") {
  auto s = troll_spec(1);
  s.title_override = "comment that is trolling";
  CHECK(whatif_spec_from_json(to_json(s)) == s);
  const auto parsed = whatif_spec_from_json(
      Json{{"thread_id", "t"}, {"at_utterance_index", 0}, {"injected_persona", "Troll:x"}});
  CHECK(parsed.alternatives == 3);
  CHECK(parsed.injected_persona->description == "x");
  CHECK_THROWS_AS(whatif_spec_from_json(Json{{"thread_id", "t"}}), Error);
}

TEST_CASE("whatif reply: troll injection") {
  const auto& u = base_universe();
  const auto& source = longest_thread();
  REQUIRE(source.size() >= 3);
  auto audit = std::make_shared<AuditLog>();
  auto gw = make_mock_gateway(audit);
  const auto result = whatif_reply(u, troll_spec(1), *gw, 5);
  CHECK(result.failures.empty());
  REQUIRE(result.threads.size() == 3);
  std::set<std::string> ids;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& t = result.threads[k];
    ids.insert(t.id());
    CHECK(t.size() == 3);
    CHECK(t.utterances()[0] == source.utterances()[0]);
    CHECK(t.utterances()[1] == source.utterances()[1]);
    CHECK(t.back().author() == "Troll");
    REQUIRE(t.provenance().has_value());
    CHECK(t.provenance()->source_thread == source.id());
    CHECK(t.provenance()->source_universe == u.id);
    CHECK(t.provenance()->kind == BranchKind::kWhatIfReply);
    CHECK(t.provenance()->branch_index == k);
    CHECK(t.provenance()->spec["injected_persona"]["label"] == "Troll");
  }
  CHECK(ids.size() == 3);
  for (const auto& r : audit->records()) {
    CHECK(r.temperature == 0.7);
    CHECK(r.operation == "whatif_reply");
    CHECK(r.prompt.find("title=\"comment that is trolling\">\"") != std::string::npos);
    CHECK(r.prompt.find("[Troll] shares trolling comments.") != std::string::npos);
  }
  // Same seed, same alternatives; the source universe is untouched.
  CHECK(whatif_reply(u, troll_spec(1), *make_mock_gateway(), 5).threads == result.threads);
  CHECK(base_universe() == u);
}

TEST_CASE("whatif reply: roster member by name") {
  const auto& u = base_universe();
  const auto& source = longest_thread();
  WhatIfSpec s;
  s.thread_id = source.id();
  s.at_utterance_index = 0;
  std::string member;
  for (const auto& p : u.roster) {
    if (p.name() != source.utterances()[0].author()) {
      member = p.name();
      break;
    }
  }
  s.injected_persona = InjectedPersona{member, ""};
  s.alternatives = 1;
  const auto r = whatif_reply(u, s, *make_mock_gateway(), 1);
  REQUIRE(r.threads.size() == 1);
  CHECK(r.threads[0].back().author() == member);
}

TEST_CASE("whatif validation") {
  const auto& u = base_universe();
  auto gw = make_mock_gateway();
  auto s = troll_spec(0);
  s.thread_id = "missing";
  CHECK(code_of([&] { whatif_reply(u, s, *gw, 1); }) == ErrorCode::kNotFound);
  s = troll_spec(99);
  CHECK(code_of([&] { whatif_reply(u, s, *gw, 1); }) == ErrorCode::kInvalidSpec);
  s = troll_spec(0);
  s.injected_persona.reset();
  CHECK(code_of([&] { whatif_reply(u, s, *gw, 1); }) == ErrorCode::kInvalidSpec);
  s.injected_persona = InjectedPersona{"Nobody Here", ""};
  CHECK(code_of([&] { whatif_reply(u, s, *gw, 1); }) == ErrorCode::kInvalidSpec);
  s.injected_persona = InjectedPersona{longest_thread().utterances()[0].author(), ""};
  CHECK(code_of([&] { whatif_reply(u, s, *gw, 1); }) == ErrorCode::kInvalidSpec);
  s = troll_spec(0);
  s.alternatives = 0;
  CHECK(code_of([&] { whatif_reply(u, s, *gw, 1); }) == ErrorCode::kInvalidSpec);
  s = troll_spec(0);
  CHECK(code_of([&] { whatif_intervention(u, s, *gw, 1); }) == ErrorCode::kInvalidSpec);
}

TEST_CASE("whatif intervention: the probed author answers the moderator") {
  const auto& u = base_universe();
  const auto& source = longest_thread();
  WhatIfSpec s;
  s.thread_id = source.id();
  s.at_utterance_index = 1;
  s.intervention_text = "Please keep it civil.";
  auto audit = std::make_shared<AuditLog>();
  const auto r = whatif_intervention(u, s, *make_mock_gateway(audit), 3);
  REQUIRE(r.threads.size() == 3);
  for (const auto& t : r.threads) {
    REQUIRE(t.size() == 4);
    CHECK(t.utterances()[2].author() == "Moderator");
    CHECK(t.utterances()[2].kind() == UtteranceKind::kIntervention);
    CHECK(t.utterances()[2].text() == "Please keep it civil.");
    CHECK(t.utterances()[3].author() == source.utterances()[1].author());
    CHECK(t.provenance()->kind == BranchKind::kWhatIfIntervention);
  }
  for (const auto& rec : audit->records()) {
    CHECK(rec.temperature == 0.7);
    CHECK(rec.prompt.find("[Moderator]: <span class=\"comment\">\n\"Please keep it civil.\"</span>") !=
          std::string::npos);
  }
  // With an injected persona, that persona answers instead.
  s.injected_persona = InjectedPersona{"Troll", "shares trolling comments"};
  const auto r2 = whatif_intervention(u, s, *make_mock_gateway(), 3);
  for (const auto& t : r2.threads) CHECK(t.back().author() == "Troll");
}

TEST_CASE("branch failures are collected per alternative") {
  const auto& u = base_universe();
  auto mock = std::make_shared<MockBackend>();
  auto backend = std::make_shared<ScriptedBackend>([mock](const CompletionRequest& r, std::size_t call) {
    if (call < 1 + kEmptyResamples) return CompletionResult{"", FinishReason::kOther};
    return mock->complete(r);
  });
  Gateway gw(backend, BackendConfig{});
  const auto r = whatif_reply(u, troll_spec(0), gw, 1);
  CHECK(r.threads.size() == 2);
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].branch_index == 0);
  CHECK(r.failures[0].code == ErrorCode::kGenerationFailed);
  CHECK(to_json(r)["failures"][0]["code"] == "generation_failed");

  auto dead = std::make_shared<ScriptedBackend>(
      [](auto&, auto) { return CompletionResult{"", FinishReason::kOther}; });
  Gateway gw2(dead, BackendConfig{});
  CHECK(code_of([&] { whatif_reply(u, troll_spec(0), gw2, 1); }) == ErrorCode::kGenerationFailed);
}

TEST_CASE("multiverse thread: k continuations at the multiverse temperature") {
  const auto& u = base_universe();
  const auto& source = longest_thread();
  auto audit = std::make_shared<AuditLog>();
  const auto r = multiverse_thread(u, source.id(), 1, 4, *make_mock_gateway(audit), 8);
  REQUIRE(r.threads.size() == 4);
  for (const auto& t : r.threads) {
    CHECK(t.size() >= 3);
    CHECK(t.utterances()[1] == source.utterances()[1]);
    CHECK(t.utterances()[2].author() != source.utterances()[1].author());
    CHECK(t.provenance()->kind == BranchKind::kMultiverseThread);
  }
  for (const auto& rec : audit->records()) {
    CHECK(rec.temperature == 0.8);
    CHECK(rec.operation == "multiverse_thread");
  }
  const std::size_t cap = u.config.max_replies;
  // A prefix that already holds max_replies replies cannot be continued.
  CHECK(code_of([&] { multiverse_thread(u, source.id(), cap, 2, *make_mock_gateway(), 1); }) ==
        ErrorCode::kInvalidSpec);
}

TEST_CASE("multiverse community: sibling universe under the same parent") {
  const auto design = psychotherapy_design();
  const auto config = small_config(1, 3, 20);
  auto audit = std::make_shared<AuditLog>();
  MultiverseOptions opts;
  opts.seed = 99;
  const auto u = multiverse_community("d-parent", design, config, *make_mock_gateway(audit), opts);
  CHECK(u.parent_community == "d-parent");
  CHECK(u.config.rng_seed == 99);
  auto expected = config;
  expected.rng_seed = 99;
  CHECK(u.config == expected);
  CHECK(u.threads.size() == 3);
  for (const auto& rec : audit->records()) {
    CHECK(rec.temperature == 0.8);
    CHECK((rec.operation == "multiverse_community" || rec.operation == "expand_personas"));
  }
  const auto v = multiverse_community("d-parent", design, config, *make_mock_gateway());
  CHECK(v.id != u.id);
}
