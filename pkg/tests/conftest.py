"""Shared test fixtures: corpus loading, broken heuristics, stub runner."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

from downhill import fixtures as corpus
from downhill.heuristics import Heuristic

TESTS_DIR = Path(__file__).parent
STUB_RUNNER = TESTS_DIR / "helpers" / "stub_runner.py"

PDDL_FIXTURE_IDS = ("ferry-0", "ferry-1", "ferry-2", "gripper-1",
                    "blocks-1", "negpre-1", "deadend-1")
GRAPH_FIXTURE_IDS = ("fig2a", "fig2b")


def stub_runner_command(mode: str = "goalcount") -> list[str]:
    return [sys.executable, str(STUB_RUNNER), mode]


@pytest.fixture(scope="session")
def loaded():
    """All fixtures parsed once per session, keyed by id."""
    return {fid: corpus.load_fixture(fid)
            for fid in PDDL_FIXTURE_IDS + GRAPH_FIXTURE_IDS}


@pytest.fixture(scope="session")
def ferry2(loaded):
    return loaded["ferry-2"]


class FactWeightHeuristic(Heuristic):
    """Test-only heuristic: value of the first weighted fact present."""

    name = "fact-weight"

    def __init__(self, task, weights: dict[str, float], default: float = 0.0):
        self._task = task
        self._weights = weights
        self._default = default

    def evaluate(self, state) -> float:
        for fact in self._task.describe_state(state):
            if fact in self._weights:
                return self._weights[fact]
        return self._default
