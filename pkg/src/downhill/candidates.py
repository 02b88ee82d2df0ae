"""Run untrusted candidate heuristic code in a child process.

The child speaks line-delimited JSON over stdin/stdout, one message per
line, UTF-8:

    parent -> child   {"type":"init","domain_pddl":str,"task_pddl":str,"code":str}
    child  -> parent  {"type":"ready"} | {"type":"load_error","message":str}
    parent -> child   {"type":"eval","id":int,"states":[[fact,...],...]}
    child  -> parent  {"type":"values","id":int,"h":[number|"inf",...]}
    parent -> child   {"type":"shutdown"}

States are sent as lexicographically sorted fact lists, so equal states
produce byte-identical payloads.  Eval accepts a batch so a successor set
costs one round trip.  Unknown message types are protocol violations; all
values must be non-negative.  Any child failure marks the handle dead and
surfaces as a structured error, never as a property counterexample.

``InProcessRunner`` executes *trusted* candidate code (repair-loop tests,
fixtures) directly in this process with the same entry-point contract:
``h(state: set[str], ctx)``.
"""

from __future__ import annotations

import hashlib
import json
import math
import queue
import subprocess
import threading
import time
import traceback
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .errors import (
    CandidateLoadError,
    ChildCrashed,
    EvalTimeout,
    HandshakeTimeout,
    ProtocolViolation,
    SpawnFailure,
)
from .heuristics import Heuristic
from .search import Limits
from .statespace import GroundTask

INITIAL = "initial"
REPAIR = "repair"

_STDERR_TAIL_LINES = 30


@dataclass(frozen=True)
class CandidateSource:
    """Opaque candidate program text plus its provenance in the loop."""

    code: str
    language_tag: str = "python"
    origin: str = INITIAL
    iteration: int = 0

    def __post_init__(self):
        if not self.code:
            raise ValueError("candidate code must not be empty")

    @property
    def id(self) -> str:
        return hashlib.sha256(self.code.encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class ExitReport:
    returncode: int | None
    stderr_tail: str
    forced: bool
    already_dead: bool = False


class HeuristicHandle:
    """One child process bound to one task; never reused across tasks."""

    INITIALIZING = "initializing"
    READY = "ready"
    DEAD = "dead"

    def __init__(self, process: subprocess.Popen, per_eval_timeout: float):
        self.process = process
        self.per_eval_timeout = per_eval_timeout
        self.state = self.INITIALIZING
        self.dead_reason = ""
        self._message_id = 0
        self._lines: queue.Queue = queue.Queue()
        self._stderr_tail: deque[str] = deque(maxlen=_STDERR_TAIL_LINES)
        self._stdout_thread = threading.Thread(target=self._drain_stdout, daemon=True)
        self._stderr_thread = threading.Thread(target=self._drain_stderr, daemon=True)
        self._stdout_thread.start()
        self._stderr_thread.start()

    def _drain_stdout(self):
        for line in self.process.stdout:
            self._lines.put(line)
        self._lines.put(None)  # EOF sentinel

    def _drain_stderr(self):
        for line in self.process.stderr:
            self._stderr_tail.append(line.rstrip("\n"))

    def stderr_tail(self) -> str:
        return "\n".join(self._stderr_tail)

    def _mark_dead(self, reason: str):
        self.state = self.DEAD
        self.dead_reason = reason
        if self.process.poll() is None:
            self.process.kill()

    def send(self, message: dict):
        try:
            self.process.stdin.write(json.dumps(message) + "\n")
            self.process.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            self._mark_dead(f"write failed: {exc}")
            raise ChildCrashed(f"candidate process went away: {exc}",
                               self.process.poll(), self.stderr_tail()) from exc

    def receive(self, timeout: float) -> dict:
        try:
            line = self._lines.get(timeout=timeout)
        except queue.Empty:
            self._mark_dead("eval timeout")
            raise EvalTimeout(
                f"candidate did not answer within {timeout:.3f}s"
            ) from None
        if line is None:
            self._mark_dead("child exited")
            raise ChildCrashed("candidate process exited unexpectedly",
                               self.process.poll(), self.stderr_tail())
        try:
            message = json.loads(line)
        except json.JSONDecodeError as exc:
            self._mark_dead("garbage on the wire")
            raise ProtocolViolation(f"child sent a non-JSON line: {exc}", raw=line) from exc
        if not isinstance(message, dict) or "type" not in message:
            self._mark_dead("malformed message")
            raise ProtocolViolation("child message has no type", raw=line)
        return message

    def next_message_id(self) -> int:
        self._message_id += 1
        return self._message_id

    @property
    def evaluations_sent(self) -> int:
        return self._message_id


def _set_child_limits(memory_bytes: int | None):
    if memory_bytes is None:
        return None

    def preexec():  # pragma: no cover - runs in the child
        import resource

        resource.setrlimit(resource.RLIMIT_AS, (memory_bytes, memory_bytes))

    return preexec


def spawn(runner_command: Sequence[str], candidate: CandidateSource,
          domain_text: str, task_text: str, limits: Limits | None = None, *,
          per_eval_timeout: float = 1.0, handshake_timeout: float = 10.0) -> HeuristicHandle:
    """Start a candidate child, send init, and wait for the ready reply."""
    limits = limits or Limits()
    try:
        process = subprocess.Popen(
            list(runner_command),
            stdin=subprocess.PIPE, stdout=subprocess.PIPE, stderr=subprocess.PIPE,
            text=True, encoding="utf-8",
            preexec_fn=_set_child_limits(limits.memory_bytes),
        )
    except OSError as exc:
        raise SpawnFailure(f"cannot start runner {runner_command!r}: {exc}") from exc

    handle = HeuristicHandle(process, per_eval_timeout)
    init = {"type": "init", "domain_pddl": domain_text, "task_pddl": task_text,
            "code": candidate.code}
    try:
        handle.send(init)
        reply = handle.receive(handshake_timeout)
    except EvalTimeout:
        handle._mark_dead("handshake timeout")
        raise HandshakeTimeout(
            f"no ready reply within {handshake_timeout:.1f}s; stderr: {handle.stderr_tail()}"
        ) from None
    except ChildCrashed as crash:
        raise CandidateLoadError(
            f"candidate process died during startup: {crash}",
            stderr_tail=crash.stderr_tail,
        ) from crash

    if reply.get("type") == "ready":
        handle.state = HeuristicHandle.READY
        return handle
    if reply.get("type") == "load_error":
        message = str(reply.get("message", "unknown load error"))
        handle._mark_dead("load error")
        raise CandidateLoadError(message, stderr_tail=handle.stderr_tail())
    handle._mark_dead("bad handshake")
    raise ProtocolViolation(f"unexpected handshake reply type {reply.get('type')!r}",
                            raw=json.dumps(reply))


def eval_states(handle: HeuristicHandle, fact_lists: list[list[str]]) -> list[float]:
    """One eval round trip for a batch of states (sorted fact lists)."""
    if handle.state != HeuristicHandle.READY:
        raise ChildCrashed(f"handle is {handle.state} ({handle.dead_reason})",
                           handle.process.poll(), handle.stderr_tail())
    if not fact_lists:
        return []
    message_id = handle.next_message_id()
    handle.send({"type": "eval", "id": message_id, "states": fact_lists})
    timeout = handle.per_eval_timeout * max(1, len(fact_lists))
    reply = handle.receive(timeout)
    if reply.get("type") != "values":
        handle._mark_dead("unexpected message type")
        raise ProtocolViolation(f"expected values, got {reply.get('type')!r}",
                                raw=json.dumps(reply))
    if reply.get("id") != message_id:
        handle._mark_dead("id mismatch")
        raise ProtocolViolation(
            f"reply id {reply.get('id')} does not match request id {message_id}",
            raw=json.dumps(reply))
    raw_values = reply.get("h")
    if not isinstance(raw_values, list) or len(raw_values) != len(fact_lists):
        handle._mark_dead("value count mismatch")
        raise ProtocolViolation("values reply has the wrong length", raw=json.dumps(reply))
    values = []
    for raw in raw_values:
        values.append(_parse_wire_value(handle, raw))
    return values


def eval_state(handle: HeuristicHandle, fact_list: list[str]) -> float:
    return eval_states(handle, [fact_list])[0]


def _parse_wire_value(handle: HeuristicHandle, raw) -> float:
    if raw == "inf":
        return math.inf
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        handle._mark_dead("non-numeric value")
        raise ProtocolViolation(f"heuristic value {raw!r} is not a number")
    value = float(raw)
    if math.isnan(value):
        handle._mark_dead("NaN value")
        raise ProtocolViolation("heuristic value is NaN")
    if value < 0:
        handle._mark_dead("negative value")
        raise ProtocolViolation(f"heuristic value {value} is negative")
    return value


def shutdown(handle: HeuristicHandle, grace: float = 2.0) -> ExitReport:
    """Polite shutdown, then kill after the grace period. Idempotent."""
    process = handle.process
    if handle.state == HeuristicHandle.DEAD and process.poll() is not None:
        return ExitReport(process.poll(), handle.stderr_tail(), forced=False,
                          already_dead=True)
    forced = False
    try:
        if process.poll() is None:
            process.stdin.write(json.dumps({"type": "shutdown"}) + "\n")
            process.stdin.flush()
    except (BrokenPipeError, OSError):
        pass
    try:
        process.wait(timeout=grace)
    except subprocess.TimeoutExpired:
        process.kill()
        forced = True
        process.wait()
    handle.state = HeuristicHandle.DEAD
    handle.dead_reason = handle.dead_reason or "shutdown"
    return ExitReport(process.poll(), handle.stderr_tail(), forced=forced)


# ---------------------------------------------------------------------------
# Heuristic adapters

def state_payload(task: GroundTask, state) -> list[str]:
    """Lexicographically sorted fact list; the canonical wire encoding."""
    return sorted(task.describe_state(state))


class CandidateHeuristic(Heuristic):
    """Heuristic view of a candidate handle bound to a grounded task."""

    def __init__(self, handle: HeuristicHandle, task: GroundTask, name: str = "candidate"):
        self.handle = handle
        self.task = task
        self.name = name

    def evaluate(self, state) -> float:
        return eval_state(self.handle, state_payload(self.task, state))

    def evaluate_batch(self, states) -> list[float]:
        payload = [state_payload(self.task, s) for s in states]
        return eval_states(self.handle, payload)


@dataclass(frozen=True)
class TaskContext:
    """Static task data handed to candidate code alongside each state."""

    goals: frozenset[str]
    init: frozenset[str]
    objects: dict[str, str] = field(default_factory=dict)
    domain_name: str = ""
    task_name: str = ""


class SubprocessRunner:
    """Binds candidates to tasks via child processes (production path)."""

    def __init__(self, command: Sequence[str], *, limits: Limits | None = None,
                 per_eval_timeout: float = 1.0, handshake_timeout: float = 10.0):
        self.command = list(command)
        self.limits = limits or Limits()
        self.per_eval_timeout = per_eval_timeout
        self.handshake_timeout = handshake_timeout

    @contextmanager
    def bind(self, candidate: CandidateSource, binding) -> Iterator[Heuristic]:
        handle = spawn(self.command, candidate, binding.domain_text, binding.task_text,
                       self.limits, per_eval_timeout=self.per_eval_timeout,
                       handshake_timeout=self.handshake_timeout)
        try:
            yield CandidateHeuristic(handle, binding.task,
                                     name=f"candidate-{candidate.id}")
        finally:
            shutdown(handle)


class _InProcessHeuristic(Heuristic):
    def __init__(self, fn, ctx: TaskContext, task: GroundTask, name: str):
        self._fn = fn
        self._ctx = ctx
        self._task = task
        self.name = name

    def evaluate(self, state) -> float:
        facts = set(state_payload(self._task, state))
        value = self._fn(facts, self._ctx)
        if value == "inf":
            return math.inf
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ProtocolViolation(f"heuristic value {value!r} is not a number")
        value = float(value)
        if math.isnan(value):
            raise ProtocolViolation("heuristic value is NaN")
        if value < 0:
            raise ProtocolViolation(f"heuristic value {value} is negative")
        return value


class InProcessRunner:
    """Executes trusted candidate code in this process (test/fixture path).

    Same contract as the wire runner: the code must define
    ``h(state, ctx)``; load failures raise CandidateLoadError, evaluation
    failures propagate and validation wraps them.
    """

    @contextmanager
    def bind(self, candidate: CandidateSource, binding) -> Iterator[Heuristic]:
        namespace: dict = {}
        try:
            exec(compile(candidate.code, f"<candidate {candidate.id}>", "exec"), namespace)
        except Exception as exc:
            raise CandidateLoadError(f"{type(exc).__name__}: {exc}",
                                     stderr_tail=traceback.format_exc()) from exc
        fn = namespace.get("h")
        if not callable(fn):
            raise CandidateLoadError("candidate must define a function h(state, ctx)")
        ctx = TaskContext(
            goals=frozenset(binding.task.fact_names[g] for g in binding.task.goal),
            init=frozenset(binding.task.fact_names[i] for i in binding.task.initial_ids),
            objects=dict(binding.objects),
            domain_name=binding.domain_name,
            task_name=binding.task.name,
        )
        yield _InProcessHeuristic(fn, ctx, binding.task, f"candidate-{candidate.id}")


def wait_for_exit(handle: HeuristicHandle, timeout: float) -> int | None:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        code = handle.process.poll()
        if code is not None:
            return code
        time.sleep(0.01)
    return handle.process.poll()


__all__ = [
    "CandidateSource",
    "CandidateHeuristic",
    "ExitReport",
    "HeuristicHandle",
    "InProcessRunner",
    "SubprocessRunner",
    "TaskContext",
    "eval_state",
    "eval_states",
    "shutdown",
    "spawn",
    "state_payload",
]
