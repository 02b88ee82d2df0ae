"""Instantiate a domain/task pair into a propositional GroundTask.

Grounding is a pure instantiation pass: every schema is combined with all
type-consistent object tuples, equality preconditions are evaluated
statically (dropping instantiations whose equality test fails), and facts
receive dense ids in a deterministic order (sorted init atoms, sorted goal
atoms, then encounter order along the stable grounding order).
"""

from __future__ import annotations

from itertools import product

from ..errors import GoalUnreachableStatically, PddlValidationError
from ..statespace import GroundAction, GroundTask
from .ast import EQUALS, Atom, DomainAst, TaskAst


def ground(domain: DomainAst, task: TaskAst, *, prune_static_facts: bool = False) -> GroundTask:
    """Ground ``task`` over ``domain``; negative preconditions must be gone.

    ``prune_static_facts`` drops facts that can never become true (not in
    the initial state and in no add effect) together with the actions that
    require them; off by default to keep fact ids stable across runs.
    """
    for schema in domain.schemas:
        for lit in schema.precondition:
            if lit.negated and lit.atom.predicate != EQUALS:
                raise PddlValidationError(
                    f"action {schema.name!r} still has negative precondition "
                    f"{lit.format()}; run compile_negative_preconditions first"
                )

    fact_ids: dict[Atom, int] = {}

    def intern(atom: Atom) -> int:
        fid = fact_ids.get(atom)
        if fid is None:
            fid = len(fact_ids)
            fact_ids[atom] = fid
        return fid

    for atom in sorted(task.init, key=_atom_key):
        intern(atom)
    for atom in sorted(task.goal, key=_atom_key):
        intern(atom)

    objects_by_type_cache: dict[str, list[str]] = {}

    def objects_of(typ: str) -> list[str]:
        cached = objects_by_type_cache.get(typ)
        if cached is None:
            cached = sorted(name for name, obj_type in task.objects
                            if domain.is_subtype(obj_type, typ))
            objects_by_type_cache[typ] = cached
        return cached

    actions: list[GroundAction] = []
    seen: set[tuple] = set()
    for schema in domain.schemas:
        param_domains = [objects_of(p.type) for p in schema.params]
        equalities = [(lit.atom.args[0], lit.atom.args[1], lit.negated)
                      for lit in schema.precondition if lit.atom.predicate == EQUALS]
        plain_pre = [lit.atom for lit in schema.precondition
                     if lit.atom.predicate != EQUALS]
        param_names = [p.name for p in schema.params]
        for combo in product(*param_domains):
            binding = dict(zip(param_names, combo))
            if any((binding[a] == binding[b]) == negated for a, b, negated in equalities):
                continue
            pre = frozenset(intern(_bind(atom, binding)) for atom in plain_pre)
            add = frozenset(intern(_bind(atom, binding)) for atom in schema.add)
            delete = frozenset(intern(_bind(atom, binding)) for atom in schema.delete)
            delete -= add  # deletes apply first; adding wins
            name = _action_name(schema.name, combo)
            key = (name, pre, add, delete)
            if key in seen:
                continue
            seen.add(key)
            actions.append(GroundAction(name, pre, add, delete, index=len(actions)))

    names = [""] * len(fact_ids)
    for atom, fid in fact_ids.items():
        names[fid] = atom.format()
    init_ids = {fact_ids[a] for a in task.init}
    goal_ids = {fact_ids[a] for a in task.goal}

    achievable = set(init_ids)
    for act in actions:
        achievable.update(act.add)
    for gid in sorted(goal_ids):
        if gid not in achievable:
            raise GoalUnreachableStatically(names[gid])

    if prune_static_facts:
        names, actions, init_ids, goal_ids = _prune(names, actions, init_ids,
                                                    goal_ids, achievable)

    return GroundTask(names, actions, init_ids, goal_ids, name=task.name)


def _bind(atom: Atom, binding: dict[str, str]) -> Atom:
    return Atom(atom.predicate, tuple(binding[a] for a in atom.args))


def _action_name(schema_name: str, args: tuple[str, ...]) -> str:
    if args:
        return f"({schema_name} {' '.join(args)})"
    return f"({schema_name})"


def _atom_key(atom: Atom):
    return (atom.predicate, atom.args)


def _prune(names, actions, init_ids, goal_ids, achievable):
    keep = sorted(achievable)
    remap = {old: new for new, old in enumerate(keep)}
    new_names = [names[old] for old in keep]
    new_actions = []
    for act in actions:
        if not act.pre <= achievable:
            continue  # requires a fact that can never hold
        new_actions.append(GroundAction(
            act.name,
            frozenset(remap[f] for f in act.pre),
            frozenset(remap[f] for f in act.add),
            frozenset(remap[f] for f in act.delete if f in achievable),
            index=len(new_actions),
        ))
    new_init = {remap[f] for f in init_ids}
    new_goal = {remap[f] for f in goal_ids}
    return new_names, new_actions, new_init, new_goal
