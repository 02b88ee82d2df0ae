"""PDDL front end: parsing, negative-precondition compilation, grounding."""

from .ast import (
    ActionSchema,
    Atom,
    DomainAst,
    Literal,
    Parameter,
    Predicate,
    TaskAst,
    print_domain,
    print_task,
)
from .compile import compile_negative_preconditions, negated_predicates
from .ground import ground
from .parser import parse_domain, parse_task

__all__ = [
    "ActionSchema",
    "Atom",
    "DomainAst",
    "Literal",
    "Parameter",
    "Predicate",
    "TaskAst",
    "compile_negative_preconditions",
    "negated_predicates",
    "ground",
    "parse_domain",
    "parse_task",
    "print_domain",
    "print_task",
]


def load_ground_task(domain_text: str, task_text: str, *, prune_static_facts: bool = False):
    """Parse, compile negatives away, and ground in one call."""
    domain = parse_domain(domain_text)
    task = parse_task(task_text, domain)
    domain, task = compile_negative_preconditions(domain, task)
    return ground(domain, task, prune_static_facts=prune_static_facts)
