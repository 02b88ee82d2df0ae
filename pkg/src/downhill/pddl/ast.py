"""AST types for the supported PDDL fragment plus a canonical printer.

The fragment is STRIPS + :typing + :negative-preconditions + :equality.
Equality shows up as literals whose predicate is ``=``; it is evaluated
statically during grounding and never becomes a fact.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import PddlValidationError

EQUALS = "="
ROOT_TYPE = "object"


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[str, ...]

    def format(self) -> str:
        if self.args:
            return f"({self.predicate} {' '.join(self.args)})"
        return f"({self.predicate})"


@dataclass(frozen=True)
class Literal:
    atom: Atom
    negated: bool = False

    def format(self) -> str:
        inner = self.atom.format()
        return f"(not {inner})" if self.negated else inner


@dataclass(frozen=True)
class Parameter:
    name: str
    type: str = ROOT_TYPE


@dataclass(frozen=True)
class Predicate:
    name: str
    params: tuple[Parameter, ...]

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple[Parameter, ...]
    precondition: tuple[Literal, ...]
    add: tuple[Atom, ...]
    delete: tuple[Atom, ...]


@dataclass(frozen=True)
class DomainAst:
    name: str
    types: tuple[tuple[str, str], ...]  # (type, parent) in declaration order
    predicates: tuple[Predicate, ...]
    schemas: tuple[ActionSchema, ...]

    def type_table(self) -> dict[str, str]:
        """type -> parent, with the implicit root ``object``."""
        table = {ROOT_TYPE: ROOT_TYPE}
        for name, parent in self.types:
            table[name] = parent
        return table

    def is_subtype(self, child: str, ancestor: str) -> bool:
        table = self.type_table()
        seen = set()
        current = child
        while current not in seen:
            if current == ancestor:
                return True
            seen.add(current)
            current = table.get(current, ROOT_TYPE)
        return current == ancestor

    def predicate_map(self) -> dict[str, Predicate]:
        return {p.name: p for p in self.predicates}


@dataclass(frozen=True)
class TaskAst:
    name: str
    domain_name: str
    objects: tuple[tuple[str, str], ...]  # (name, type) in declaration order
    init: frozenset[Atom]
    goal: frozenset[Atom]

    def object_map(self) -> dict[str, str]:
        return dict(self.objects)


# ---------------------------------------------------------------------------
# Canonical printer (round-trip companion to the parser)

def print_domain(domain: DomainAst) -> str:
    lines = [f"(define (domain {domain.name})"]
    requirements = [":strips", ":typing"]
    if any(lit.negated and lit.atom.predicate != EQUALS
           for schema in domain.schemas for lit in schema.precondition):
        requirements.append(":negative-preconditions")
    if any(lit.atom.predicate == EQUALS
           for schema in domain.schemas for lit in schema.precondition):
        requirements.append(":equality")
    lines.append(f"  (:requirements {' '.join(requirements)})")
    if domain.types:
        parts = " ".join(f"{name} - {parent}" for name, parent in domain.types)
        lines.append(f"  (:types {parts})")
    preds = " ".join(_print_predicate(p) for p in domain.predicates)
    lines.append(f"  (:predicates {preds})")
    for schema in domain.schemas:
        lines.append(_print_schema(schema))
    lines.append(")")
    return "\n".join(lines) + "\n"


def print_task(task: TaskAst) -> str:
    lines = [f"(define (problem {task.name})", f"  (:domain {task.domain_name})"]
    if task.objects:
        parts = " ".join(f"{name} - {typ}" for name, typ in task.objects)
        lines.append(f"  (:objects {parts})")
    init = " ".join(a.format() for a in sorted(task.init, key=_atom_key))
    lines.append(f"  (:init {init})")
    goal = " ".join(a.format() for a in sorted(task.goal, key=_atom_key))
    lines.append(f"  (:goal (and {goal}))")
    lines.append(")")
    return "\n".join(lines) + "\n"


def _print_predicate(pred: Predicate) -> str:
    if not pred.params:
        return f"({pred.name})"
    parts = " ".join(f"{p.name} - {p.type}" for p in pred.params)
    return f"({pred.name} {parts})"


def _print_schema(schema: ActionSchema) -> str:
    params = " ".join(f"{p.name} - {p.type}" for p in schema.params)
    pre = " ".join(lit.format() for lit in schema.precondition)
    effects = [a.format() for a in schema.add]
    effects += [f"(not {a.format()})" for a in schema.delete]
    eff = " ".join(effects)
    return (
        f"  (:action {schema.name}\n"
        f"    :parameters ({params})\n"
        f"    :precondition (and {pre})\n"
        f"    :effect (and {eff}))"
    )


def _atom_key(atom: Atom):
    return (atom.predicate, atom.args)


# ---------------------------------------------------------------------------
# Structural validation shared by the parser and the compiler

def validate_domain(domain: DomainAst) -> None:
    table = domain.type_table()
    seen_types: dict[str, str] = {}
    for name, parent in domain.types:
        if name == ROOT_TYPE:
            raise PddlValidationError("the root type `object` cannot be re-declared")
        if name in seen_types and seen_types[name] != parent:
            raise PddlValidationError(
                f"type {name!r} declared with multiple parents "
                f"({seen_types[name]!r} and {parent!r}); single inheritance only"
            )
        seen_types[name] = parent
    for name, parent in domain.types:
        if parent != ROOT_TYPE and parent not in table:
            raise PddlValidationError(f"type {name!r} has unknown parent {parent!r}")
        # cycle check: walking parents must end at object
        current, hops = name, 0
        while current != ROOT_TYPE:
            current = table[current]
            hops += 1
            if hops > len(table):
                raise PddlValidationError(f"type hierarchy contains a cycle through {name!r}")

    names = [p.name for p in domain.predicates]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise PddlValidationError(f"duplicate predicate names: {', '.join(dupes)}")
    for pred in domain.predicates:
        for param in pred.params:
            if param.type not in table:
                raise PddlValidationError(
                    f"predicate {pred.name!r} uses unknown type {param.type!r}"
                )

    pred_map = domain.predicate_map()
    for schema in domain.schemas:
        param_names = [p.name for p in schema.params]
        if len(set(param_names)) != len(param_names):
            raise PddlValidationError(f"action {schema.name!r} has duplicate parameters")
        params = set(param_names)
        for param in schema.params:
            if param.type not in table:
                raise PddlValidationError(
                    f"action {schema.name!r} uses unknown type {param.type!r}"
                )
        for lit in schema.precondition:
            _check_schema_atom(schema.name, lit.atom, params, pred_map, allow_equals=True)
        for atom in schema.add + schema.delete:
            _check_schema_atom(schema.name, atom, params, pred_map, allow_equals=False)


def _check_schema_atom(schema_name: str, atom: Atom, params: set[str],
                       pred_map: dict[str, Predicate], allow_equals: bool) -> None:
    if atom.predicate == EQUALS:
        if not allow_equals:
            raise PddlValidationError(
                f"action {schema_name!r}: equality is only allowed in preconditions"
            )
        if len(atom.args) != 2:
            raise PddlValidationError(f"action {schema_name!r}: `=` takes two arguments")
        for arg in atom.args:
            if arg not in params:
                raise PddlValidationError(
                    f"action {schema_name!r}: equality over {arg!r} is not statically "
                    "evaluable; only parameters may be compared"
                )
        return
    pred = pred_map.get(atom.predicate)
    if pred is None:
        raise PddlValidationError(
            f"action {schema_name!r} uses undeclared predicate {atom.predicate!r}"
        )
    if len(atom.args) != pred.arity:
        from ..errors import ArityMismatch

        raise ArityMismatch(atom.format(), pred.arity, len(atom.args))
    for arg in atom.args:
        if not arg.startswith("?"):
            raise PddlValidationError(
                f"action {schema_name!r}: atom argument {arg!r} is not a parameter; "
                "constants in schemas are not supported"
            )
        if arg not in params:
            raise PddlValidationError(
                f"action {schema_name!r}: variable {arg!r} is not a parameter"
            )
