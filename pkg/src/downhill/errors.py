"""Exception taxonomy shared across the toolkit."""

from __future__ import annotations


class DownhillError(Exception):
    """Base class for every error raised by this package."""


# ---------------------------------------------------------------------------
# PDDL front end

class PddlError(DownhillError):
    pass


class PddlSyntaxError(PddlError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class UnsupportedRequirement(PddlError):
    def __init__(self, name: str):
        super().__init__(f"unsupported PDDL construct: {name}")
        self.name = name


class PddlValidationError(PddlError):
    pass


class ArityMismatch(PddlValidationError):
    def __init__(self, atom: str, expected: int, found: int):
        super().__init__(f"atom {atom}: expected {expected} arguments, found {found}")
        self.atom = atom
        self.expected = expected
        self.found = found


class UnknownObjectType(PddlValidationError):
    def __init__(self, name: str, detail: str = ""):
        suffix = f" ({detail})" if detail else ""
        super().__init__(f"unknown object or type: {name}{suffix}")
        self.name = name


class DomainMismatch(PddlValidationError):
    def __init__(self, expected: str, found: str):
        super().__init__(f"task requires domain {found!r}, parsed domain is {expected!r}")
        self.expected = expected
        self.found = found


class GoalUnreachableStatically(PddlError):
    def __init__(self, fact: str):
        super().__init__(
            f"goal atom {fact} is not in the initial state and no action adds it"
        )
        self.fact = fact


# ---------------------------------------------------------------------------
# State space and search

class InapplicableAction(DownhillError):
    pass


class StateSpaceTooLarge(DownhillError):
    def __init__(self, cap: int):
        super().__init__(f"state space exceeds the cap of {cap} states")
        self.cap = cap


class MissingEntry(DownhillError):
    def __init__(self, node: str):
        super().__init__(f"heuristic table has no entry for node {node!r}")
        self.node = node


class RelaxedGoalUnreachable(DownhillError):
    """Raised when a relaxed plan is requested from a relaxed-unsolvable state."""


# ---------------------------------------------------------------------------
# Validation

class HeuristicEvaluationFailure(DownhillError):
    """The heuristic itself crashed while being validated.

    Distinct from a property failure: it aborts validation instead of
    producing a counterexample.
    """

    def __init__(self, state_description, message: str, cause: Exception | None = None,
                 task_id: str | None = None):
        super().__init__(message)
        self.state_description = tuple(state_description)
        self.message = message
        self.cause = cause
        self.task_id = task_id


# ---------------------------------------------------------------------------
# Candidate runtime

class CandidateError(DownhillError):
    pass


class SpawnFailure(CandidateError):
    pass


class HandshakeTimeout(CandidateError):
    pass


class CandidateLoadError(CandidateError):
    def __init__(self, message: str, stderr_tail: str = ""):
        super().__init__(message)
        self.message = message
        self.stderr_tail = stderr_tail


class ProtocolViolation(CandidateError):
    def __init__(self, message: str, raw: str = ""):
        super().__init__(message)
        self.raw = raw


class ChildCrashed(CandidateError):
    def __init__(self, message: str, returncode: int | None, stderr_tail: str = ""):
        super().__init__(message)
        self.returncode = returncode
        self.stderr_tail = stderr_tail


class EvalTimeout(CandidateError):
    pass


# ---------------------------------------------------------------------------
# Synthesizer

class SynthesizerError(DownhillError):
    pass


class TransportError(SynthesizerError):
    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class RateLimited(SynthesizerError):
    def __init__(self, retry_after: float | None = None):
        super().__init__(f"rate limited (retry after {retry_after})")
        self.retry_after = retry_after


class ModelRefusal(SynthesizerError):
    pass


class ScriptExhausted(SynthesizerError):
    pass


class NoCodeBlock(SynthesizerError):
    pass


class TemplateError(SynthesizerError):
    def __init__(self, slot: str):
        super().__init__(f"prompt template is missing a value for slot {slot!r}")
        self.slot = slot


# ---------------------------------------------------------------------------
# Fixtures and benchmarking

class UnknownFixture(DownhillError):
    def __init__(self, fixture_id: str):
        super().__init__(f"no fixture named {fixture_id!r}")
        self.fixture_id = fixture_id


class ConfigError(DownhillError):
    pass
