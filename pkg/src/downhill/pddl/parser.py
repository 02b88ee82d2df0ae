"""Tokenizer and recursive-descent parser for PDDL domain and task files.

Identifiers are case-insensitive (lowercased), ``;`` starts a line comment.
Accepted requirements: :strips, :typing, :negative-preconditions,
:equality.  Everything else (conditional effects, derived predicates,
functions, constants, quantifiers) raises ``UnsupportedRequirement``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import (
    ArityMismatch,
    DomainMismatch,
    PddlSyntaxError,
    PddlValidationError,
    UnknownObjectType,
    UnsupportedRequirement,
)
from .ast import (
    EQUALS,
    ROOT_TYPE,
    ActionSchema,
    Atom,
    DomainAst,
    Literal,
    Parameter,
    Predicate,
    TaskAst,
    validate_domain,
)

ACCEPTED_REQUIREMENTS = {":strips", ":typing", ":negative-preconditions", ":equality"}

_WORD_RE = re.compile(r"[^\s();]+")


@dataclass(frozen=True)
class _Token:
    kind: str  # "(", ")", "word"
    value: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            i += 1
            col += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            tokens.append(_Token(ch, ch, line, col))
            i += 1
            col += 1
        else:
            match = _WORD_RE.match(text, i)
            if match is None:
                raise PddlSyntaxError(line, col, f"unexpected character {ch!r}")
            word = match.group(0)
            tokens.append(_Token("word", word.lower(), line, col))
            col += len(word)
            i = match.end()
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str, value: str | None = None) -> _Token:
        tok = self.advance()
        if tok.kind != kind or (value is not None and tok.value != value):
            expected = value if value is not None else kind
            raise PddlSyntaxError(tok.line, tok.column,
                                  f"expected {expected!r}, got {tok.value or tok.kind!r}")
        return tok

    def expect_word(self) -> str:
        tok = self.advance()
        if tok.kind != "word":
            raise PddlSyntaxError(tok.line, tok.column,
                                  f"expected an identifier, got {tok.value or tok.kind!r}")
        return tok.value

    def at(self, value: str) -> bool:
        tok = self.peek()
        return tok.kind == "word" and tok.value == value

    def fail(self, message: str):
        tok = self.peek()
        raise PddlSyntaxError(tok.line, tok.column, message)

    # -- shared pieces -------------------------------------------------------

    def parse_typed_list(self, variables: bool) -> list[Parameter]:
        """``a b - t c d - u e`` style list; untyped names default to object."""
        out: list[Parameter] = []
        pending: list[str] = []
        while not self.peek().kind == ")":
            word = self.expect_word()
            if word == "-":
                if not pending:
                    self.fail("dangling '-' in typed list")
                typ = self.expect_word()
                out.extend(Parameter(p, typ) for p in pending)
                pending = []
            else:
                if variables and not word.startswith("?"):
                    self.fail(f"expected a ?variable, got {word!r}")
                if not variables and word.startswith("?"):
                    self.fail(f"expected a name, got variable {word!r}")
                pending.append(word)
        out.extend(Parameter(p, ROOT_TYPE) for p in pending)
        return out

    def parse_atom(self) -> Atom:
        self.expect("(")
        head = self.expect_word()
        args: list[str] = []
        while self.peek().kind != ")":
            args.append(self.expect_word())
        self.expect(")")
        return Atom(head, tuple(args))

    def parse_literal(self) -> Literal:
        # one of (pred ...), (not (pred ...)), (= a b), (not (= a b))
        self.expect("(")
        if self.at("not"):
            self.advance()
            atom = self.parse_atom()
            self.expect(")")
            return Literal(atom, negated=True)
        head = self.expect_word()
        args: list[str] = []
        while self.peek().kind != ")":
            tok = self.peek()
            if tok.kind == "(":
                raise UnsupportedRequirement(f"nested term inside ({head} ...)")
            args.append(self.expect_word())
        self.expect(")")
        return Literal(Atom(head, tuple(args)))

    def parse_conjunction(self, parse_item) -> list:
        """Either a bare item or ``(and item ...)``; empty ``(and)`` allowed."""
        self.expect("(")
        if self.at("and"):
            self.advance()
            items = []
            while self.peek().kind != ")":
                items.extend(self._conjunct(parse_item))
            self.expect(")")
            return items
        # single item: rewind the "(" and parse it whole
        self.pos -= 1
        return self._conjunct(parse_item)

    def _conjunct(self, parse_item) -> list:
        tok = self.peek()
        if tok.kind != "(":
            self.fail("expected '('")
        nxt = self.tokens[self.pos + 1]
        if nxt.kind == "word" and nxt.value in ("forall", "exists", "when", "imply", "or"):
            raise UnsupportedRequirement(nxt.value)
        return [parse_item()]


# ---------------------------------------------------------------------------
# Domain

def parse_domain(text: str) -> DomainAst:
    """Parse PDDL domain text; validates structure and the type hierarchy."""
    parser = _Parser(text)
    parser.expect("(")
    parser.expect("word", "define")
    parser.expect("(")
    parser.expect("word", "domain")
    name = parser.expect_word()
    parser.expect(")")

    types: list[tuple[str, str]] = []
    predicates: list[Predicate] = []
    schemas: list[ActionSchema] = []

    while parser.peek().kind != ")":
        parser.expect("(")
        section = parser.expect_word()
        if section == ":requirements":
            while parser.peek().kind == "word":
                req = parser.expect_word()
                if req not in ACCEPTED_REQUIREMENTS:
                    raise UnsupportedRequirement(req)
            parser.expect(")")
        elif section == ":types":
            for param in parser.parse_typed_list(variables=False):
                types.append((param.name, param.type))
            parser.expect(")")
        elif section == ":predicates":
            while parser.peek().kind == "(":
                parser.expect("(")
                pred_name = parser.expect_word()
                params = parser.parse_typed_list(variables=True)
                parser.expect(")")
                predicates.append(Predicate(pred_name, tuple(params)))
            parser.expect(")")
        elif section == ":action":
            schemas.append(_parse_action(parser))
            parser.expect(")")
        else:
            # :constants, :functions, :derived, ... are all out of fragment
            raise UnsupportedRequirement(section)
    parser.expect(")")

    domain = DomainAst(name, tuple(types), tuple(predicates), tuple(schemas))
    validate_domain(domain)
    return domain


def _parse_action(parser: _Parser) -> ActionSchema:
    name = parser.expect_word()
    params: list[Parameter] = []
    precondition: list[Literal] = []
    add: list[Atom] = []
    delete: list[Atom] = []
    while parser.peek().kind != ")":
        key = parser.expect_word()
        if key == ":parameters":
            parser.expect("(")
            params = parser.parse_typed_list(variables=True)
            parser.expect(")")
        elif key == ":precondition":
            precondition = parser.parse_conjunction(parser.parse_literal)
        elif key == ":effect":
            for lit in parser.parse_conjunction(parser.parse_literal):
                if lit.atom.predicate == EQUALS:
                    raise UnsupportedRequirement("equality in effects")
                if lit.negated:
                    delete.append(lit.atom)
                else:
                    add.append(lit.atom)
        else:
            raise UnsupportedRequirement(key)
    return ActionSchema(name, tuple(params), tuple(precondition), tuple(add), tuple(delete))


# ---------------------------------------------------------------------------
# Task

def parse_task(text: str, domain: DomainAst) -> TaskAst:
    """Parse PDDL task text and cross-check it against the parsed domain."""
    parser = _Parser(text)
    parser.expect("(")
    parser.expect("word", "define")
    parser.expect("(")
    parser.expect("word", "problem")
    name = parser.expect_word()
    parser.expect(")")

    domain_name: str | None = None
    objects: list[tuple[str, str]] = []
    init: list[Atom] = []
    goal: list[Atom] = []

    while parser.peek().kind != ")":
        parser.expect("(")
        section = parser.expect_word()
        if section == ":domain":
            domain_name = parser.expect_word()
            parser.expect(")")
        elif section == ":requirements":
            while parser.peek().kind == "word":
                req = parser.expect_word()
                if req not in ACCEPTED_REQUIREMENTS:
                    raise UnsupportedRequirement(req)
            parser.expect(")")
        elif section == ":objects":
            for param in parser.parse_typed_list(variables=False):
                objects.append((param.name, param.type))
            parser.expect(")")
        elif section == ":init":
            while parser.peek().kind == "(":
                init.append(parser.parse_atom())
            parser.expect(")")
        elif section == ":goal":
            for lit in parser.parse_conjunction(parser.parse_literal):
                if lit.negated:
                    raise UnsupportedRequirement("negative goal atoms")
                if lit.atom.predicate == EQUALS:
                    raise UnsupportedRequirement("equality in goals")
                goal.append(lit.atom)
            parser.expect(")")
        else:
            raise UnsupportedRequirement(section)
    parser.expect(")")

    if domain_name is None:
        parser.fail("task is missing a (:domain ...) section")
    if domain_name != domain.name:
        raise DomainMismatch(domain.name, domain_name)

    task = TaskAst(name, domain_name, tuple(objects),
                   frozenset(init), frozenset(goal))
    _validate_task(task, domain)
    return task


def _validate_task(task: TaskAst, domain: DomainAst) -> None:
    names = [n for n, _ in task.objects]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise PddlValidationError(f"duplicate object names: {', '.join(dupes)}")
    table = domain.type_table()
    for obj_name, obj_type in task.objects:
        if obj_type not in table:
            raise UnknownObjectType(obj_type, f"declared for object {obj_name!r}")
    objects = task.object_map()
    pred_map = domain.predicate_map()
    for atom in sorted(task.init | task.goal, key=lambda a: (a.predicate, a.args)):
        pred = pred_map.get(atom.predicate)
        if pred is None:
            raise PddlValidationError(f"atom {atom.format()} uses undeclared predicate")
        if len(atom.args) != pred.arity:
            raise ArityMismatch(atom.format(), pred.arity, len(atom.args))
        for arg, param in zip(atom.args, pred.params):
            if arg not in objects:
                raise UnknownObjectType(arg, f"referenced in {atom.format()}")
            if not domain.is_subtype(objects[arg], param.type):
                raise UnknownObjectType(
                    arg, f"type {objects[arg]!r} does not fit {param.type!r} in {atom.format()}"
                )
