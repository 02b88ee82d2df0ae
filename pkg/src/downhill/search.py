"""Hill climbing and greedy best-first search with resource limits.

Hill climbing is steepest descent: it moves to the successor with the
smallest heuristic value among those strictly below the current one,
breaking ties by successor order.  GBFS is eager with a full closed set;
ties in the open list are FIFO by generation order.  Memory limits are the
process supervisor's job (see bench); the search loops only track wall
time and expansion/generation counts, surfacing breaches as a timeout.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

from .heuristics import Heuristic
from .statespace import TransitionSystem

PLAN = "plan"
STUCK = "stuck"
EXHAUSTED = "exhausted"
TIMEOUT = "timeout"


@dataclass(frozen=True)
class Limits:
    wall_time: float = 300.0
    max_expansions: int | None = None
    max_generated: int | None = None
    memory_bytes: int | None = None

    def __post_init__(self):
        if not self.wall_time > 0:
            raise ValueError("wall_time must be positive")


@dataclass(frozen=True)
class SearchStats:
    expansions: int = 0
    generated: int = 0
    peak_open: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class SearchResult:
    status: str
    plan: tuple[str, ...] | None = None
    stuck_state: object = None
    stuck_h: float | None = None
    stuck_successors: tuple[tuple[str, float], ...] | None = None
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def solved(self) -> bool:
        return self.status == PLAN


class _Budget:
    def __init__(self, limits: Limits):
        self.limits = limits
        self.start = time.monotonic()
        self.deadline = self.start + limits.wall_time

    def exceeded(self, expansions: int, generated: int) -> bool:
        if time.monotonic() > self.deadline:
            return True
        lim = self.limits
        if lim.max_expansions is not None and expansions >= lim.max_expansions:
            return True
        if lim.max_generated is not None and generated >= lim.max_generated:
            return True
        return False

    def elapsed(self) -> float:
        return time.monotonic() - self.start


def hill_climb(ts: TransitionSystem, h: Heuristic, limits: Limits) -> SearchResult:
    budget = _Budget(limits)
    state = ts.initial()
    current_h = h.evaluate(state)
    plan: list[str] = []
    expansions = 0
    generated = 0

    while True:
        if budget.exceeded(expansions, generated):
            return SearchResult(TIMEOUT, stats=_stats(budget, expansions, generated))
        if ts.is_goal(state):
            return SearchResult(PLAN, plan=tuple(plan),
                                stats=_stats(budget, expansions, generated))
        succ = ts.successors(state)
        expansions += 1
        generated += len(succ)
        values = h.evaluate_batch([s for _, s in succ])
        best = None
        for i, value in enumerate(values):
            if value < current_h and (best is None or value < values[best]):
                best = i
        if best is None:
            report = tuple((label, value) for (label, _), value in zip(succ, values))
            return SearchResult(STUCK, stuck_state=state, stuck_h=current_h,
                                stuck_successors=report,
                                stats=_stats(budget, expansions, generated))
        plan.append(succ[best][0])
        state = succ[best][1]
        current_h = values[best]


def gbfs(ts: TransitionSystem, h: Heuristic, limits: Limits) -> SearchResult:
    budget = _Budget(limits)
    start = ts.initial()
    counter = 0
    open_list: list[tuple[float, int, object]] = [(h.evaluate(start), counter, start)]
    seen = {start}
    parents: dict[object, tuple[object, str]] = {}
    expansions = 0
    generated = 1
    peak_open = 1

    while open_list:
        if budget.exceeded(expansions, generated):
            return SearchResult(TIMEOUT,
                                stats=_stats(budget, expansions, generated, peak_open))
        _, _, state = heapq.heappop(open_list)
        if ts.is_goal(state):
            return SearchResult(PLAN, plan=_reconstruct(parents, start, state),
                                stats=_stats(budget, expansions, generated, peak_open))
        succ = ts.successors(state)
        expansions += 1
        fresh = []
        for label, s in succ:
            if s not in seen:
                seen.add(s)
                fresh.append((label, s))
        values = h.evaluate_batch([s for _, s in fresh])
        for (label, s), value in zip(fresh, values):
            parents[s] = (state, label)
            counter += 1
            generated += 1
            heapq.heappush(open_list, (value, counter, s))
        peak_open = max(peak_open, len(open_list))

    return SearchResult(EXHAUSTED, stats=_stats(budget, expansions, generated, peak_open))


def _reconstruct(parents, start, state) -> tuple[str, ...]:
    labels: list[str] = []
    while state != start:
        state, label = parents[state]
        labels.append(label)
    labels.reverse()
    return tuple(labels)


def _stats(budget: _Budget, expansions: int, generated: int, peak_open: int = 0) -> SearchStats:
    return SearchStats(expansions=expansions, generated=generated,
                       peak_open=peak_open, wall_time=budget.elapsed())
