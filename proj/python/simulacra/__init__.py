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

"""Python access to the simulacra engine.

Designs, universes and threads are plain dicts in the same JSON shape the
CLI and the HTTP API use.
"""

from __future__ import annotations

import json
from typing import Any, Iterable

from . import _simulacra
from ._simulacra import SimulacraError

__all__ = [
    "SimulacraError",
    "Session",
    "Store",
    "design_id",
    "headline_prompt",
    "make_pairs",
    "parse_completion",
    "reply_prompt",
    "transcript",
    "validate_design",
]


def _dump(value: Any) -> str:
    return json.dumps(value)


def validate_design(design: dict) -> list[str]:
    """Every violation in `design`; empty when it is valid."""
    return list(_simulacra.validate_design(_dump(design)))


def design_id(design: dict) -> str:
    return _simulacra.design_id(_dump(design))


def headline_prompt(persona: dict, design: dict, ablation: str = "full") -> str:
    return _simulacra.headline_prompt(_dump(persona), _dump(design), ablation)


def reply_prompt(persona: dict, utterances: list[dict], design: dict, config: dict | None = None) -> str:
    return _simulacra.reply_prompt(_dump(persona), _dump(utterances), _dump(design), _dump(config or {}))


def parse_completion(raw: str) -> str:
    return _simulacra.parse_completion(raw)


def transcript(thread: dict) -> str:
    return _simulacra.transcript(_dump(thread))


def make_pairs(real: Iterable[tuple[str, str]], generated: Iterable[tuple[str, str]], seed: int) -> dict:
    """Blind comparison pairs from (source, text) conversations, with the answer key."""
    return json.loads(_simulacra.make_pairs(list(real), list(generated), seed))


class Session:
    """Generation against one backend ("mock" or "live"), with an audit trail."""

    def __init__(self, backend: str = "mock") -> None:
        self._impl = _simulacra.Session(backend)

    def generate(self, design: dict, config: dict | None = None, created_at: int = 0, workers: int = 1) -> dict:
        return json.loads(self._impl.generate(_dump(design), _dump(config or {}), created_at, workers))

    def personas(self, design: dict, count: int, seed: int = 0, temperature: float = 0.7) -> list[dict]:
        return json.loads(self._impl.personas(_dump(design), count, seed, temperature))

    def whatif(self, universe: dict, spec: dict, seed: int) -> dict:
        return json.loads(self._impl.whatif(_dump(universe), _dump(spec), seed))

    def thread_multiverse(self, universe: dict, thread_id: str, at_utterance_index: int,
                          alternatives: int, seed: int) -> dict:
        return json.loads(
            self._impl.thread_multiverse(_dump(universe), thread_id, at_utterance_index, alternatives, seed))

    def community_multiverse(self, universe: dict, seed: int, created_at: int = 0) -> dict:
        return json.loads(self._impl.community_multiverse(_dump(universe), seed, created_at))

    def audit(self) -> list[dict]:
        return json.loads(self._impl.audit())


class Store:
    """File-backed, append-only storage rooted at a directory."""

    def __init__(self, root: str) -> None:
        self._impl = _simulacra.Store(str(root))

    def save_design(self, design: dict) -> str:
        return self._impl.save_design(_dump(design))

    def load_design(self, design_id: str) -> dict:
        return json.loads(self._impl.load_design(design_id))

    def list_designs(self) -> list[str]:
        return list(self._impl.list_designs())

    def save_universe(self, universe: dict) -> str:
        return self._impl.save_universe(_dump(universe))

    def load_universe(self, universe_id: str) -> dict:
        return json.loads(self._impl.load_universe(universe_id))

    def list_universes(self, parent_community: str = "") -> list[dict]:
        return json.loads(self._impl.list_universes(parent_community))

    def append_threads(self, universe_id: str, threads: list[dict]) -> None:
        self._impl.append_threads(universe_id, _dump(threads))

    def load_branches(self, universe_id: str) -> list[dict]:
        return json.loads(self._impl.load_branches(universe_id))
