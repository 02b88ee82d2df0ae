"""Direct-property validation: DFS checker with counterexamples, exact oracles.

``check_direct`` runs a depth-first search from the initial state that only
follows strictly improving transitions.  Expanded non-goal states must have
an improving successor; the first state that does not yields an actionable
counterexample (a plateau/local minimum with the full successor report, or
a dead end with the parent's value and a repair suggestion).  Goal states
are never expanded.  Hitting the time limit counts as a presumed pass.

``oracle_direct`` and ``oracle_dda`` compute the exact verdicts on small
instances by explicit fixpoints over the full reachable space; they are the
ground truth the checker is tested against.

A crash inside the heuristic is not a property failure: it aborts with
``HeuristicEvaluationFailure`` so the repair loop can turn it into error
feedback instead of fabricating a counterexample.
"""

from __future__ import annotations

import json
import math
import time
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterator

from contextlib import contextmanager

from .errors import HeuristicEvaluationFailure, StateSpaceTooLarge
from .heuristics import CountingHeuristic, Heuristic
from .statespace import TransitionSystem

PLATEAU = "plateau"
DEAD_END = "dead_end"

PASS = "pass"
PRESUMED_PASS = "presumed_pass"
FAIL = "fail"


@dataclass(frozen=True)
class Counterexample:
    """Witness of a direct-property violation, ready to feed back verbatim."""

    kind: str  # PLATEAU | DEAD_END
    state: tuple[str, ...]
    h_state: float
    successors: tuple[tuple[str, float], ...]
    parent_h: float | None
    suggestion: str | None
    task_id: str
    path_from_initial: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "state": list(self.state),
            "h_state": _json_value(self.h_state),
            "successors": [[label, _json_value(v)] for label, v in self.successors],
            "parent_h": None if self.parent_h is None else _json_value(self.parent_h),
            "suggestion": self.suggestion,
            "task_id": self.task_id,
            "path_from_initial": list(self.path_from_initial),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "Counterexample":
        return cls(
            kind=doc["kind"],
            state=tuple(doc["state"]),
            h_state=_parse_value(doc["h_state"]),
            successors=tuple((label, _parse_value(v)) for label, v in doc["successors"]),
            parent_h=None if doc["parent_h"] is None else _parse_value(doc["parent_h"]),
            suggestion=doc["suggestion"],
            task_id=doc["task_id"],
            path_from_initial=tuple(doc["path_from_initial"]),
        )


def _json_value(v: float):
    if math.isinf(v):
        return "inf"
    if float(v).is_integer():
        return int(v)
    return float(v)


def _parse_value(v) -> float:
    return math.inf if v == "inf" else float(v)


@dataclass(frozen=True)
class ValidationOutcome:
    status: str  # PASS | PRESUMED_PASS | FAIL
    states_checked: int
    counterexample: Counterexample | None = None
    reason: str | None = None
    wall_time: float = 0.0
    evaluations: int = 0

    @property
    def passed(self) -> bool:
        return self.status in (PASS, PRESUMED_PASS)


def check_direct(ts: TransitionSystem, h: Heuristic, time_limit: float,
                 task_id: str = "task") -> ValidationOutcome:
    """DFS over strictly improving transitions; first failure wins.

    Improving successors are pushed in reverse successor order so they pop
    in successor order, which makes the reported counterexample
    deterministic.  States are marked visited when first expanded.  The
    clock is checked before each expansion.

    A dead end at the initial state itself (non-goal, no successors, no
    parent) is reported as a plateau with an empty successor list, since a
    dead-end counterexample carries its parent's value by definition.
    """
    if not time_limit > 0:
        raise ValueError("time_limit must be positive")
    start = time.monotonic()
    deadline = start + time_limit
    counting = CountingHeuristic(h)

    def outcome(status, checked, counterexample=None, reason=None):
        return ValidationOutcome(status, checked, counterexample, reason,
                                 wall_time=time.monotonic() - start,
                                 evaluations=counting.evaluations)

    root = ts.initial()
    if ts.is_goal(root):
        return outcome(PASS, 0)
    root_h = _evaluate(counting, ts, [root], task_id)[0]

    # stack entries: (state, h, parent_h, path labels)
    stack: list[tuple[object, float, float | None, tuple[str, ...]]] = [
        (root, root_h, None, ())
    ]
    visited = set()

    while stack:
        if time.monotonic() > deadline:
            return outcome(PRESUMED_PASS, len(visited), reason="time limit reached")
        state, state_h, parent_h, path = stack.pop()
        if state in visited:
            continue
        visited.add(state)

        succ = ts.successors(state)
        values = _evaluate(counting, ts, [s for _, s in succ], task_id)

        if not succ:
            if parent_h is None:
                counterexample = Counterexample(
                    kind=PLATEAU, state=ts.describe_state(state), h_state=state_h,
                    successors=(), parent_h=None, suggestion=None,
                    task_id=task_id, path_from_initial=path,
                )
            else:
                counterexample = Counterexample(
                    kind=DEAD_END, state=ts.describe_state(state), h_state=state_h,
                    successors=(), parent_h=parent_h,
                    suggestion=(
                        f"this state is a dead end; assign it a value >= {_json_value(parent_h)} "
                        "so the search never enters it"
                    ),
                    task_id=task_id, path_from_initial=path,
                )
            return outcome(FAIL, len(visited), counterexample)

        improving = [(label, s, v) for (label, s), v in zip(succ, values) if v < state_h]
        if not improving:
            counterexample = Counterexample(
                kind=PLATEAU, state=ts.describe_state(state), h_state=state_h,
                successors=tuple((label, v) for (label, _), v in zip(succ, values)),
                parent_h=None, suggestion=None,
                task_id=task_id, path_from_initial=path,
            )
            return outcome(FAIL, len(visited), counterexample)

        for label, s, v in reversed(improving):
            if ts.is_goal(s):
                continue  # goals are never expanded
            if s not in visited:
                stack.append((s, v, state_h, path + (label,)))

    return outcome(PASS, len(visited))


def _evaluate(counting: CountingHeuristic, ts: TransitionSystem, states, task_id):
    try:
        return counting.evaluate_batch(states)
    except Exception as exc:  # crash policy: abort, do not fabricate a counterexample
        description = ts.describe_state(states[0]) if states else ()
        raise HeuristicEvaluationFailure(
            description, f"heuristic evaluation failed: {exc}", cause=exc,
            task_id=task_id,
        ) from exc


# ---------------------------------------------------------------------------
# Suites

HeuristicProvider = Callable[[str, TransitionSystem], "object"]


@dataclass(frozen=True)
class SuiteOutcome:
    entries: tuple[tuple[str, ValidationOutcome], ...]
    untouched: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.untouched and all(o.passed for _, o in self.entries)

    @property
    def failure(self) -> Counterexample | None:
        for _, outcome in self.entries:
            if outcome.status == FAIL:
                return outcome.counterexample
        return None


def check_direct_suite(tasks, h, per_task_limit: float) -> SuiteOutcome:
    """Run ``check_direct`` task by task, stopping at the first failure.

    ``tasks`` is an ordered list of ``(id, transition_system)`` pairs.  ``h``
    is either a single Heuristic used for every task or a provider: a
    callable ``(task_id, ts)`` returning a context manager that yields the
    task-bound Heuristic (needed for per-task candidate processes).  Tasks
    after the first failure are never touched.
    """
    if not tasks:
        raise ValueError("task list must not be empty")
    provider = h if callable(h) and not isinstance(h, Heuristic) else _shared(h)
    entries: list[tuple[str, ValidationOutcome]] = []
    for position, (task_id, ts) in enumerate(tasks):
        try:
            with provider(task_id, ts) as bound:
                outcome = check_direct(ts, bound, per_task_limit, task_id=task_id)
        except HeuristicEvaluationFailure as failure:
            if failure.task_id is None:
                failure.task_id = task_id
            raise
        entries.append((task_id, outcome))
        if outcome.status == FAIL:
            untouched = tuple(task_id for task_id, _ in tasks[position + 1:])
            return SuiteOutcome(tuple(entries), untouched)
    return SuiteOutcome(tuple(entries), ())


def _shared(h: Heuristic):
    @contextmanager
    def provider(task_id, ts) -> Iterator[Heuristic]:
        yield h

    return provider


# ---------------------------------------------------------------------------
# Exact oracles (small instances only)

@dataclass(frozen=True)
class DirectOracleResult:
    passed: bool
    sdown: frozenset
    reason: str | None = None


@dataclass(frozen=True)
class DdaOracleResult:
    passed: bool
    alive: frozenset
    reason: str | None = None


def _explore(ts: TransitionSystem, cap: int):
    """Full reachable space with adjacency; ``StateSpaceTooLarge`` past cap."""
    start = ts.initial()
    adjacency: dict[object, list[tuple[str, object]]] = {}
    order = [start]
    seen = {start}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        succ = ts.successors(state)
        adjacency[state] = succ
        for _, s in succ:
            if s not in seen:
                if len(seen) >= cap:
                    raise StateSpaceTooLarge(cap)
                seen.add(s)
                order.append(s)
                queue.append(s)
    return order, adjacency


def _solvable_states(ts: TransitionSystem, order, adjacency) -> set:
    reverse: dict[object, list[object]] = {s: [] for s in order}
    goals = []
    for state in order:
        if ts.is_goal(state):
            goals.append(state)
        for _, succ in adjacency[state]:
            reverse[succ].append(state)
    solvable = set(goals)
    queue = deque(goals)
    while queue:
        state = queue.popleft()
        for pred in reverse[state]:
            if pred not in solvable:
                solvable.add(pred)
                queue.append(pred)
    return solvable


def oracle_direct(ts: TransitionSystem, h: Heuristic, cap: int) -> DirectOracleResult:
    """Exact direct-property verdict via the alive-state fixpoint.

    Explores the full reachable space (needed for the exact solvability
    check behind alive-ness), computes the least set of alive states
    reachable from the initial state through strictly improving
    transitions, and checks that each has an improving successor and that
    every improving successor is a goal or stays inside the set.
    """
    order, adjacency = _explore(ts, cap)
    solvable = _solvable_states(ts, order, adjacency)
    values: dict[object, float] = {}

    def value(state) -> float:
        if state not in values:
            values[state] = h.evaluate(state)
        return values[state]

    def alive(state) -> bool:
        return state in solvable and not ts.is_goal(state)

    start = ts.initial()
    sdown: set = set()
    if alive(start):
        sdown.add(start)
        queue = deque([start])
        while queue:
            state = queue.popleft()
            for _, succ in adjacency[state]:
                if value(succ) < value(state) and alive(succ) and succ not in sdown:
                    sdown.add(succ)
                    queue.append(succ)

    for state in order:  # deterministic reporting order
        if state not in sdown:
            continue
        improving = [(label, succ) for label, succ in adjacency[state]
                     if value(succ) < value(state)]
        if not improving:
            return DirectOracleResult(False, frozenset(sdown),
                                      f"state {ts.describe_state(state)} has no improving successor")
        for label, succ in improving:
            if not (ts.is_goal(succ) or succ in sdown):
                return DirectOracleResult(False, frozenset(sdown),
                                          f"improving successor via {label!r} leaves the improving set")
    return DirectOracleResult(True, frozenset(sdown))


def oracle_dda(ts: TransitionSystem, h: Heuristic, cap: int) -> DdaOracleResult:
    """Exact descending + dead-end-avoiding verdict over all alive states."""
    order, adjacency = _explore(ts, cap)
    solvable = _solvable_states(ts, order, adjacency)
    values: dict[object, float] = {}

    def value(state) -> float:
        if state not in values:
            values[state] = h.evaluate(state)
        return values[state]

    alive = [s for s in order if s in solvable and not ts.is_goal(s)]
    for state in alive:
        improving = [succ for _, succ in adjacency[state] if value(succ) < value(state)]
        if not improving:
            return DdaOracleResult(False, frozenset(alive),
                                   f"alive state {ts.describe_state(state)} has no improving successor")
        for succ in improving:
            if succ not in solvable:
                return DdaOracleResult(False, frozenset(alive),
                                       f"improving successor of {ts.describe_state(state)} is unsolvable")
    return DdaOracleResult(True, frozenset(alive))
