# Copyright 2026 The Simulacra Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import pytest

import simulacra

DESIGN = {
    "goal": "sharing your psychotherapy stories and questions",
    "rules": ["No encouraging suicide", "No anti-therapy", "No trolling"],
    "seed_personas": [
        {"name": "Layla Li", "description": "a college student studying to be a social worker"},
        {"name": "Tom Cheng", "description": "a recovering addict who likes to spot bad therapists"},
        {"name": "Maria Gomez", "description": "a psychiatric nurse on night shifts"},
    ],
}
SMALL = {"thread_count": 4, "persona_pool_size": 25, "rng_seed": 42}


def test_design_validation():
    assert simulacra.validate_design(DESIGN) == []
    problems = simulacra.validate_design({"goal": "", "rules": [], "seed_personas": []})
    assert len(problems) >= 2
    assert simulacra.design_id(DESIGN).startswith("d-")


def test_prompts_and_parsing():
    prompt = simulacra.headline_prompt(DESIGN["seed_personas"][0], DESIGN)
    assert prompt.startswith("Layla Li is a college student")
    assert simulacra.headline_prompt(DESIGN["seed_personas"][0], DESIGN, "no_description").find("psychotherapy") == -1
    assert simulacra.parse_completion('"Hello there."</span> trailing') == "Hello there."


def test_generate_is_reproducible():
    session = simulacra.Session("mock")
    a = session.generate(DESIGN, SMALL)
    b = simulacra.Session().generate(DESIGN, SMALL)
    assert a == b
    assert len(a["threads"]) == 4
    assert len(a["roster"]) == 25
    assert {r["temperature"] for r in session.audit()} == {0.7}
    assert simulacra.transcript(a["threads"][0]).startswith("[")


def test_whatif_multiverse_and_store(tmp_path):
    session = simulacra.Session()
    universe = session.generate(DESIGN, SMALL)
    thread = universe["threads"][0]["id"]
    spec = {"thread_id": thread, "at_utterance_index": 0, "injected_persona": "Troll:shares trolling comments"}
    result = session.whatif(universe, spec, seed=7)
    assert len(result["threads"]) == 3
    assert all(t["utterances"][-1]["author"] == "Troll" for t in result["threads"])

    branches = session.thread_multiverse(universe, thread, 0, 2, seed=3)
    sibling = session.community_multiverse(universe, seed=9)
    assert sibling["id"] != universe["id"]
    assert sibling["parent_community"] == universe["parent_community"]

    store = simulacra.Store(tmp_path)
    assert store.save_universe(universe) == universe["id"]
    store.save_universe(sibling)
    assert store.load_universe(universe["id"]) == universe
    store.append_threads(universe["id"], result["threads"] + branches["threads"])
    assert len(store.load_branches(universe["id"])) == 5
    assert [u["id"] for u in store.list_universes(universe["parent_community"])] == [universe["id"], sibling["id"]]


def test_errors_carry_codes(tmp_path):
    session = simulacra.Session()
    universe = session.generate(DESIGN, SMALL)
    with pytest.raises(simulacra.SimulacraError) as info:
        session.whatif(universe, {"thread_id": "missing", "at_utterance_index": 0,
                                  "injected_persona": "Troll:x"}, seed=1)
    assert info.value.code == "not_found"
    with pytest.raises(simulacra.SimulacraError) as info:
        session.generate({"goal": "", "rules": [], "seed_personas": []})
    assert info.value.code == "validation"
    assert info.value.violations
    with pytest.raises(simulacra.SimulacraError) as info:
        simulacra.Store(tmp_path).load_universe("u-none")
    assert info.value.code == "not_found"


def test_pairs():
    out = simulacra.make_pairs([("a.txt", "real a"), ("b.txt", "real b")],
                               [("t0", "gen 0"), ("t1", "gen 1")], 3)
    assert [k["real_side"] for k in out["answer_key"]] == ["right", "left"]
