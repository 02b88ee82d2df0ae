"""States, grounded tasks, explicit graphs, and successor generation.

Two transition-system backings share one interface: :class:`GroundTask`
(propositional planning task over bitset states) and :class:`ExplicitGraph`
(named nodes, used to encode small hand-drawn state spaces).  Successor
order is deterministic: grounding order for tasks, adjacency order for
graphs.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Protocol, runtime_checkable

import numpy as np

from . import _kernels
from .errors import InapplicableAction, StateSpaceTooLarge


class BitsetState:
    """Immutable, hashable set of true facts packed into uint64 words."""

    __slots__ = ("words", "_key", "_hash")

    def __init__(self, words: np.ndarray):
        words = np.ascontiguousarray(words, dtype=np.uint64)
        words.setflags(write=False)
        object.__setattr__(self, "words", words)
        object.__setattr__(self, "_key", words.tobytes())
        object.__setattr__(self, "_hash", hash(self._key))

    def __setattr__(self, name, value):
        raise AttributeError("BitsetState is immutable")

    def __eq__(self, other):
        return isinstance(other, BitsetState) and self._key == other._key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"BitsetState({self._key.hex()})"


@dataclass(frozen=True)
class GroundAction:
    """Fully instantiated action; ``add`` and ``delete`` are disjoint."""

    name: str
    pre: frozenset
    add: frozenset
    delete: frozenset
    index: int
    cost: int = 1


@runtime_checkable
class TransitionSystem(Protocol):
    """What search, validation, and the oracles need from a task."""

    def initial(self): ...

    def is_goal(self, state) -> bool: ...

    def successors(self, state) -> list: ...

    def describe_state(self, state) -> tuple: ...


class GroundTask:
    """Grounded planning task: fact universe, actions, initial state, goal.

    Holds packed precondition/add/delete masks (for the applicability
    kernel) and CSR views of the same sets (for the relaxed-reachability
    kernel).  Immutable after construction and shareable across workers.
    """

    def __init__(self, fact_names: Iterable[str], actions: Iterable[GroundAction],
                 initial_ids: Iterable[int], goal_ids: Iterable[int], name: str = "task"):
        self.name = name
        self.fact_names = tuple(fact_names)
        self.actions = tuple(actions)
        self.num_facts = len(self.fact_names)
        self.num_words = _kernels.words_for(self.num_facts)
        self.goal = frozenset(int(g) for g in goal_ids)
        self.initial_ids = frozenset(int(i) for i in initial_ids)
        self._check_ids()

        self._goal_words = _kernels.pack_ids(sorted(self.goal), self.num_facts)
        self._initial = BitsetState(_kernels.pack_ids(sorted(self.initial_ids), self.num_facts))

        num_actions = len(self.actions)
        self._pre_words = np.zeros((num_actions, self.num_words), dtype=np.uint64)
        self._add_words = np.zeros_like(self._pre_words)
        self._del_words = np.zeros_like(self._pre_words)
        pre_lists, add_lists = [], []
        for i, act in enumerate(self.actions):
            self._pre_words[i] = _kernels.pack_ids(sorted(act.pre), self.num_facts)
            self._add_words[i] = _kernels.pack_ids(sorted(act.add), self.num_facts)
            self._del_words[i] = _kernels.pack_ids(sorted(act.delete), self.num_facts)
            pre_lists.append(sorted(act.pre))
            add_lists.append(sorted(act.add))
        self.pre_flat, self.pre_off = _csr(pre_lists)
        self.add_flat, self.add_off = _csr(add_lists)
        self._goal_mask = np.zeros(self.num_facts, dtype=bool)
        if self.goal:
            self._goal_mask[sorted(self.goal)] = True

    def _check_ids(self):
        universe = range(self.num_facts)
        for fid in self.initial_ids:
            if fid not in universe:
                raise ValueError(f"initial fact id {fid} outside the universe")
        for fid in self.goal:
            if fid not in universe:
                raise ValueError(f"goal fact id {fid} outside the universe")
        for act in self.actions:
            for fid in act.pre | act.add | act.delete:
                if fid not in universe:
                    raise ValueError(f"action {act.name} references fact id {fid}")

    # -- TransitionSystem interface ---------------------------------------

    def initial(self) -> BitsetState:
        return self._initial

    def is_goal(self, state: BitsetState) -> bool:
        return _kernels.is_subset(self._goal_words, state.words)

    def successors(self, state: BitsetState) -> list[tuple[str, BitsetState]]:
        out = []
        for act in self.applicable(state):
            out.append((act.name, self._apply_index(state, act.index)))
        return out

    def describe_state(self, state: BitsetState) -> tuple[str, ...]:
        ids = _kernels.ids_from_words(state.words, self.num_facts)
        return tuple(sorted(self.fact_names[i] for i in ids))

    # -- task-specific operations ------------------------------------------

    def applicable(self, state: BitsetState) -> list[GroundAction]:
        if not self.actions:
            return []
        mask = _kernels.applicable_mask(self._pre_words, state.words)
        return [self.actions[i] for i in np.flatnonzero(mask)]

    def apply(self, state: BitsetState, action: GroundAction) -> BitsetState:
        if not _kernels.is_subset(self._pre_words[action.index], state.words):
            raise InapplicableAction(f"{action.name} is not applicable in this state")
        return self._apply_index(state, action.index)

    def _apply_index(self, state: BitsetState, index: int) -> BitsetState:
        words = (state.words & ~self._del_words[index]) | self._add_words[index]
        return BitsetState(words)

    def state_from_ids(self, ids: Iterable[int]) -> BitsetState:
        return BitsetState(_kernels.pack_ids(sorted(set(int(i) for i in ids)), self.num_facts))

    def state_from_atoms(self, atoms: Iterable[str]) -> BitsetState:
        index = {name: i for i, name in enumerate(self.fact_names)}
        return self.state_from_ids(index[a] for a in atoms)

    def fact_ids(self, state: BitsetState) -> tuple[int, ...]:
        return tuple(int(i) for i in _kernels.ids_from_words(state.words, self.num_facts))

    def state_bools(self, state: BitsetState) -> np.ndarray:
        return _kernels.unpack_bools(state.words, self.num_facts)

    @property
    def goal_mask(self) -> np.ndarray:
        return self._goal_mask


class ExplicitGraph:
    """Named transition system loaded from a small JSON document.

    Format::

        {"nodes": [...], "edges": [[from, label, to], ...],
         "initial": ..., "goals": [...], "h": {"node": value-or-"inf"}}

    The optional ``h`` map feeds the table heuristic.
    """

    def __init__(self, nodes, edges, initial, goals, h_map=None, name: str = "graph"):
        self.name = name
        self.nodes = tuple(str(n) for n in nodes)
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise ValueError("duplicate node names")
        self.adjacency: dict[str, list[tuple[str, str]]] = {n: [] for n in self.nodes}
        for src, label, dst in edges:
            if src not in node_set or dst not in node_set:
                raise ValueError(f"edge ({src}, {label}, {dst}) references unknown node")
            self.adjacency[str(src)].append((str(label), str(dst)))
        if initial not in node_set:
            raise ValueError(f"initial node {initial!r} unknown")
        self.initial_node = str(initial)
        self.goal_nodes = frozenset(str(g) for g in goals)
        if not self.goal_nodes <= node_set:
            raise ValueError("goal set references unknown nodes")
        self.h_map = dict(h_map) if h_map is not None else None

    @classmethod
    def from_json(cls, doc, name: str = "graph") -> "ExplicitGraph":
        if isinstance(doc, str):
            doc = json.loads(doc)
        h_map = None
        if "h" in doc:
            h_map = {}
            for node, value in doc["h"].items():
                h_map[str(node)] = float("inf") if value == "inf" else float(value)
        return cls(doc["nodes"], doc["edges"], doc["initial"], doc["goals"], h_map, name=name)

    @classmethod
    def from_file(cls, path, name: str | None = None) -> "ExplicitGraph":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls.from_json(doc, name=name or str(path))

    # -- TransitionSystem interface ---------------------------------------

    def initial(self) -> str:
        return self.initial_node

    def is_goal(self, state: str) -> bool:
        return state in self.goal_nodes

    def successors(self, state: str) -> list[tuple[str, str]]:
        return list(self.adjacency[state])

    def describe_state(self, state: str) -> tuple[str, ...]:
        return (state,)


# ---------------------------------------------------------------------------
# Module-level operations over any TransitionSystem

def applicable_actions(task: GroundTask, state: BitsetState) -> list[GroundAction]:
    return task.applicable(state)


def apply_action(task: GroundTask, state: BitsetState, action: GroundAction) -> BitsetState:
    return task.apply(state, action)


def successors(ts: TransitionSystem, state) -> list:
    return ts.successors(state)


def enumerate_reachable(ts: TransitionSystem, cap: int) -> frozenset:
    """BFS closure from the initial state; errors out beyond ``cap`` states."""
    if cap <= 0:
        raise ValueError("cap must be positive")
    start = ts.initial()
    seen = {start}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        for _, succ in ts.successors(state):
            if succ not in seen:
                if len(seen) >= cap:
                    raise StateSpaceTooLarge(cap)
                seen.add(succ)
                queue.append(succ)
    return frozenset(seen)


def replay_plan(ts: TransitionSystem, labels: Iterable[str]):
    """Follow ``labels`` from the initial state; returns the final state.

    Raises ValueError when a label does not match any successor.
    """
    state = ts.initial()
    for label in labels:
        for succ_label, succ in ts.successors(state):
            if succ_label == label:
                state = succ
                break
        else:
            raise ValueError(f"label {label!r} not applicable during replay")
    return state


def _csr(lists: list[list[int]]) -> tuple[np.ndarray, np.ndarray]:
    offsets = np.zeros(len(lists) + 1, dtype=np.int32)
    for i, lst in enumerate(lists):
        offsets[i + 1] = offsets[i] + len(lst)
    flat = np.zeros(int(offsets[-1]), dtype=np.int32)
    for i, lst in enumerate(lists):
        flat[offsets[i]:offsets[i + 1]] = lst
    return flat, offsets
