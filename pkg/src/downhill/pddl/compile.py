"""Compile away negative preconditions.

For every predicate ``p`` that occurs negated in some precondition a twin
``not-p`` with identical parameters is introduced; ``(not (p ...))``
becomes ``(not-p ...)``, every effect touching ``p`` keeps the twin in
sync, and the initial state is completed so that exactly one of ``p`` /
``not-p`` holds for every type-consistent grounding.  Negated equality is
left alone; the grounder evaluates it statically.
"""

from __future__ import annotations

from itertools import product

from ..errors import PddlValidationError
from .ast import (
    EQUALS,
    ActionSchema,
    Atom,
    DomainAst,
    Literal,
    Predicate,
    TaskAst,
    validate_domain,
)

NEGATION_PREFIX = "not-"


def negated_predicates(domain: DomainAst) -> frozenset[str]:
    found = set()
    for schema in domain.schemas:
        for lit in schema.precondition:
            if lit.negated and lit.atom.predicate != EQUALS:
                found.add(lit.atom.predicate)
    return frozenset(found)


def compile_negative_preconditions(domain: DomainAst, task: TaskAst) -> tuple[DomainAst, TaskAst]:
    """Returns an equivalent (domain, task) pair free of negative preconditions.

    Identity when the domain has none.
    """
    negated = negated_predicates(domain)
    if not negated:
        return domain, task

    pred_map = domain.predicate_map()
    twin_names = {p: NEGATION_PREFIX + p for p in negated}
    for twin in twin_names.values():
        if twin in pred_map:
            raise PddlValidationError(
                f"cannot introduce predicate {twin!r}: the name is already taken"
            )

    predicates = list(domain.predicates)
    for pred_name in sorted(negated):
        base = pred_map[pred_name]
        predicates.append(Predicate(twin_names[pred_name], base.params))

    schemas = []
    for schema in domain.schemas:
        precondition = []
        for lit in schema.precondition:
            if lit.negated and lit.atom.predicate in twin_names:
                precondition.append(
                    Literal(Atom(twin_names[lit.atom.predicate], lit.atom.args))
                )
            else:
                precondition.append(lit)
        add = list(schema.add)
        delete = list(schema.delete)
        for atom in schema.add:
            if atom.predicate in twin_names:
                delete.append(Atom(twin_names[atom.predicate], atom.args))
        for atom in schema.delete:
            if atom.predicate in twin_names:
                add.append(Atom(twin_names[atom.predicate], atom.args))
        schemas.append(ActionSchema(schema.name, schema.params,
                                    tuple(precondition), tuple(add), tuple(delete)))

    new_domain = DomainAst(domain.name, domain.types, tuple(predicates), tuple(schemas))
    validate_domain(new_domain)

    # complete the initial state: not-p(o..) for every grounding of p not in init
    objects = task.object_map()
    init = set(task.init)
    for pred_name in sorted(negated):
        base = pred_map[pred_name]
        holding = {atom.args for atom in task.init if atom.predicate == pred_name}
        domains = []
        for param in base.params:
            domains.append(sorted(
                name for name, typ in task.objects if domain.is_subtype(typ, param.type)
            ))
        for combo in product(*domains):
            if combo not in holding:
                init.add(Atom(twin_names[pred_name], combo))
    del objects

    new_task = TaskAst(task.name, task.domain_name, task.objects,
                       frozenset(init), task.goal)
    return new_domain, new_task
