"""Static task context handed to the candidate next to every state."""

from __future__ import annotations

from dataclasses import dataclass, field

from ._sexp import parse, sections


def _atom(parts: list[str]) -> str:
    return "(" + " ".join(parts) + ")"


def _typed_pairs(tokens: list[str]) -> list[tuple[str, str]]:
    """``a b - t c`` style list to (name, type) pairs; untyped -> object."""
    pairs: list[tuple[str, str]] = []
    pending: list[str] = []
    i = 0
    while i < len(tokens):
        token = tokens[i]
        if token == "-":
            typ = tokens[i + 1]
            pairs.extend((name, typ) for name in pending)
            pending = []
            i += 2
        else:
            pending.append(token)
            i += 1
    pairs.extend((name, "object") for name in pending)
    return pairs


def _flatten_goal(node) -> list[str]:
    if not isinstance(node, list) or not node:
        return []
    if node[0] == "and":
        atoms: list[str] = []
        for child in node[1:]:
            atoms.extend(_flatten_goal(child))
        return atoms
    return [_atom(node)]


@dataclass(frozen=True)
class TaskContext:
    """What candidate code may rely on besides the state itself.

    ``goals`` and ``init`` are frozensets of ground atom strings in the
    same "(pred obj ...)" spelling the evaluation states use;
    ``objects`` maps object names to their declared type.
    """

    goals: frozenset[str]
    init: frozenset[str]
    objects: dict[str, str] = field(default_factory=dict)
    domain_name: str = ""
    task_name: str = ""

    @classmethod
    def from_pddl(cls, domain_text: str, task_text: str) -> "TaskContext":
        domain_name = ""
        if domain_text.strip():
            domain_tree = parse(domain_text)
            for node in domain_tree:
                if isinstance(node, list) and node and node[0] == "domain":
                    domain_name = node[1]

        task_tree = parse(task_text)
        task_name = ""
        objects: dict[str, str] = {}
        init: set[str] = set()
        goals: set[str] = set()
        for node in task_tree:
            if isinstance(node, list) and node and node[0] == "problem":
                task_name = node[1]
        for section in sections(task_tree, ":objects"):
            for name, typ in _typed_pairs(section[1:]):
                objects[name] = typ
        for section in sections(task_tree, ":init"):
            for atom in section[1:]:
                if isinstance(atom, list):
                    init.add(_atom(atom))
        for section in sections(task_tree, ":goal"):
            for child in section[1:]:
                goals.update(_flatten_goal(child))
        return cls(goals=frozenset(goals), init=frozenset(init),
                   objects=objects, domain_name=domain_name, task_name=task_name)
