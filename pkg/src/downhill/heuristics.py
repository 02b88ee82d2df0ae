"""Heuristic interface and built-in baselines.

Heuristic values are plain floats: non-negative, never NaN, with
``math.inf`` meaning "goal unreachable from here".  Comparisons are exact;
all built-ins emit integers.  A heuristic bound to a task is immutable and
may be evaluated concurrently.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .errors import MissingEntry, RelaxedGoalUnreachable
from .statespace import BitsetState, ExplicitGraph, GroundAction, GroundTask

INFINITY = math.inf


def check_value(value) -> float:
    """Validate and coerce a heuristic value. Rejects negatives and NaN."""
    v = float(value)
    if math.isnan(v):
        raise ValueError("heuristic value is NaN")
    if v < 0:
        raise ValueError(f"heuristic value {v} is negative")
    return v


class Heuristic:
    """Pure function from states to non-negative values (or infinity)."""

    name = "heuristic"

    def evaluate(self, state) -> float:
        raise NotImplementedError

    def evaluate_batch(self, states) -> list[float]:
        return [self.evaluate(s) for s in states]


class BlindHeuristic(Heuristic):
    """0 on goal states, 1 everywhere else."""

    name = "blind"

    def __init__(self, task):
        self._task = task

    def evaluate(self, state) -> float:
        return 0.0 if self._task.is_goal(state) else 1.0


class GoalCountHeuristic(Heuristic):
    """Number of goal facts not yet true."""

    name = "goal-count"

    def __init__(self, task: GroundTask):
        self._task = task
        self._goal_words = _kernels.pack_ids(sorted(task.goal), task.num_facts)

    def evaluate(self, state: BitsetState) -> float:
        missing = self._goal_words & ~state.words
        return float(int(np.bitwise_count(missing).sum()))


class TableHeuristic(Heuristic):
    """Lookup table over the nodes of an explicit graph."""

    name = "table"

    def __init__(self, table: dict[str, float]):
        self._table = {}
        for node, value in table.items():
            self._table[node] = check_value(value)

    @classmethod
    def from_graph(cls, graph: ExplicitGraph) -> "TableHeuristic":
        if graph.h_map is None:
            raise MissingEntry("<no h map in graph>")
        for node in graph.nodes:
            if node not in graph.h_map:
                raise MissingEntry(node)
        return cls(graph.h_map)

    def evaluate(self, state) -> float:
        try:
            return self._table[state]
        except KeyError:
            raise MissingEntry(str(state)) from None


class FFHeuristic(Heuristic):
    """Delete-relaxation heuristic: length of an extracted relaxed plan.

    Builds relaxed reachability layers from the state; infinity when some
    goal fact stays unreachable, otherwise the size of the relaxed plan
    obtained by backward-chaining best supporters (first achiever wins,
    ties broken by lowest action id).
    """

    name = "ff"

    def __init__(self, task: GroundTask):
        self._task = task

    def evaluate(self, state: BitsetState) -> float:
        selected = self._relaxed_plan_ids(state)
        if selected is None:
            return INFINITY
        return float(len(selected))

    def relaxed_plan(self, state: BitsetState) -> list[GroundAction]:
        """The extracted relaxed plan, ordered by layer then action id."""
        selected = self._relaxed_plan_ids(state)
        if selected is None:
            raise RelaxedGoalUnreachable(
                "no delete-relaxed plan exists from this state"
            )
        return [self._task.actions[i] for i in selected]

    def _relaxed_plan_ids(self, state: BitsetState) -> list[int] | None:
        task = self._task
        in_state = task.state_bools(state)
        fact_layer, act_layer, supporter, reached = _kernels.ff_forward(
            in_state, task.goal_mask,
            task.pre_flat, task.pre_off, task.add_flat, task.add_off,
        )
        if not reached:
            return None
        return _extract_relaxed_plan(fact_layer, act_layer, supporter,
                                     task.pre_flat, task.pre_off,
                                     sorted(task.goal))


def _extract_relaxed_plan(fact_layer, act_layer, supporter, pre_flat, pre_off,
                          goal_ids) -> list[int]:
    needed = np.zeros(fact_layer.shape[0], dtype=bool)
    max_layer = 0
    for g in goal_ids:
        layer = int(fact_layer[g])
        if layer > 0:
            needed[g] = True
            max_layer = max(max_layer, layer)
    selected = np.zeros(act_layer.shape[0], dtype=bool)
    for layer in range(max_layer, 0, -1):
        for fact in np.flatnonzero(needed & (fact_layer == layer)):
            action = int(supporter[fact])
            if selected[action]:
                continue
            selected[action] = True
            for k in range(pre_off[action], pre_off[action + 1]):
                pre_fact = pre_flat[k]
                if fact_layer[pre_fact] > 0:
                    needed[pre_fact] = True
    ids = np.flatnonzero(selected)
    order = np.lexsort((ids, act_layer[ids]))
    return [int(i) for i in ids[order]]


# ---------------------------------------------------------------------------
# Factory functions (the public spelling used by the CLI and bench)

def blind(task) -> Heuristic:
    return BlindHeuristic(task)


def goal_count(task: GroundTask) -> Heuristic:
    return GoalCountHeuristic(task)


def ff(task: GroundTask) -> Heuristic:
    return FFHeuristic(task)


def table_heuristic(graph: ExplicitGraph) -> Heuristic:
    return TableHeuristic.from_graph(graph)


def best_supporter_trace(task: GroundTask, state: BitsetState) -> list[GroundAction]:
    """Relaxed plan whose length equals ``ff(task).evaluate(state)``."""
    return FFHeuristic(task).relaxed_plan(state)


BUILTIN_HEURISTICS = ("blind", "goal-count", "ff", "table")


def make_builtin(name: str, ts) -> Heuristic:
    if name == "blind":
        return BlindHeuristic(ts)
    if name == "goal-count":
        if not isinstance(ts, GroundTask):
            raise ValueError("goal-count needs a grounded task")
        return GoalCountHeuristic(ts)
    if name == "ff":
        if not isinstance(ts, GroundTask):
            raise ValueError("ff needs a grounded task")
        return FFHeuristic(ts)
    if name == "table":
        if not isinstance(ts, ExplicitGraph):
            raise ValueError("the table heuristic needs an explicit graph")
        return TableHeuristic.from_graph(ts)
    raise ValueError(f"unknown heuristic {name!r}")


class CountingHeuristic(Heuristic):
    """Wrapper that counts evaluations; used by validation and bench."""

    def __init__(self, inner: Heuristic):
        self.inner = inner
        self.name = inner.name
        self.evaluations = 0

    def evaluate(self, state) -> float:
        self.evaluations += 1
        return self.inner.evaluate(state)

    def evaluate_batch(self, states) -> list[float]:
        states = list(states)
        self.evaluations += len(states)
        return self.inner.evaluate_batch(states)
