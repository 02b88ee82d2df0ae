"""Candidate runtime: spawn/eval/shutdown over the wire protocol.

These tests drive a standalone stub child (tests/helpers/stub_runner.py)
that speaks the protocol but computes values itself, so the primary suite
never depends on the separate SDK package.
"""

import json
import math
import time

import pytest

from downhill import enumerate_reachable
from downhill import fixtures as corpus
from downhill.candidates import (
    CandidateHeuristic,
    CandidateSource,
    InProcessRunner,
    eval_state,
    eval_states,
    shutdown,
    spawn,
    state_payload,
)
from downhill.errors import (
    CandidateLoadError,
    ChildCrashed,
    EvalTimeout,
    HandshakeTimeout,
    ProtocolViolation,
    SpawnFailure,
)
from downhill.heuristics import goal_count
from downhill.repair import load_training_task
from downhill.search import Limits

from conftest import stub_runner_command

GOOD_CODE = "def h(state, ctx):\n    return len(ctx.goals - state)\n"


@pytest.fixture(scope="module")
def ferry1():
    fx = corpus.load_fixture("ferry-1")
    return fx


def _spawn(fx, mode="goalcount", code=GOOD_CODE, **kwargs):
    return spawn(stub_runner_command(mode), CandidateSource(code=code),
                 fx.domain_text, fx.task_text, Limits(wall_time=30.0), **kwargs)


# ---------------------------------------------------------------------------
# spawn

def test_spawn_ready(ferry1):
    handle = _spawn(ferry1, "fixed01")
    assert handle.state == handle.READY
    # fixed 0/1 runner: 1 on the non-goal initial state
    task = ferry1.task
    assert eval_state(handle, state_payload(task, task.initial())) == 1.0
    goal = task.state_from_atoms(["(at c1 l1)", "(at-ferry l1)", "(empty-ferry)"])
    assert eval_state(handle, state_payload(task, goal)) == 0.0
    report = shutdown(handle)
    assert report.returncode == 0
    assert not report.forced


def test_spawn_syntax_error_reports_load_error(ferry1):
    bad_code = corpus.load_fixture("cand-syntax-error").code
    with pytest.raises(CandidateLoadError) as exc:
        _spawn(ferry1, "goalcount", code=bad_code)
    assert "SyntaxError" in exc.value.message


def test_spawn_handshake_timeout(ferry1):
    with pytest.raises(HandshakeTimeout):
        _spawn(ferry1, "sleep-handshake", handshake_timeout=0.3)


def test_spawn_failure_unresolvable_command(ferry1):
    with pytest.raises(SpawnFailure):
        spawn(["/no/such/binary"], CandidateSource(code=GOOD_CODE),
              ferry1.domain_text, ferry1.task_text)


# ---------------------------------------------------------------------------
# eval

def test_eval_goal_count_equivalence(ferry1):
    """Wire goal-count matches the in-process heuristic on every state."""
    task = ferry1.task
    handle = _spawn(ferry1, "goalcount")
    reference = goal_count(task)
    try:
        for state in enumerate_reachable(task, 1000):
            wire = eval_state(handle, state_payload(task, state))
            assert wire == reference.evaluate(state)
    finally:
        shutdown(handle)


def test_eval_batch_one_round_trip(ferry1):
    task = ferry1.task
    handle = _spawn(ferry1, "goalcount")
    try:
        states = list(enumerate_reachable(task, 1000))
        payload = [state_payload(task, s) for s in states]
        values = eval_states(handle, payload)
        assert len(values) == len(states)
        assert handle.evaluations_sent == 1  # one message for the whole batch
    finally:
        shutdown(handle)


def test_eval_inf(ferry1):
    handle = _spawn(ferry1, "inf")
    try:
        value = eval_state(handle, state_payload(ferry1.task, ferry1.task.initial()))
        assert value == math.inf
    finally:
        shutdown(handle)


def test_eval_negative_is_protocol_violation(ferry1):
    handle = _spawn(ferry1, "negative")
    with pytest.raises(ProtocolViolation):
        eval_state(handle, state_payload(ferry1.task, ferry1.task.initial()))
    assert handle.state == handle.DEAD
    shutdown(handle)


def test_eval_garbage_is_protocol_violation(ferry1):
    handle = _spawn(ferry1, "garbage")
    with pytest.raises(ProtocolViolation):
        eval_state(handle, state_payload(ferry1.task, ferry1.task.initial()))
    shutdown(handle)


def test_eval_wrong_id_is_protocol_violation(ferry1):
    handle = _spawn(ferry1, "wrong-id")
    with pytest.raises(ProtocolViolation):
        eval_state(handle, state_payload(ferry1.task, ferry1.task.initial()))
    shutdown(handle)


def test_eval_crash_reports_stderr(ferry1):
    handle = _spawn(ferry1, "crash-eval")
    with pytest.raises(ChildCrashed) as exc:
        eval_state(handle, state_payload(ferry1.task, ferry1.task.initial()))
    time.sleep(0.05)  # let the stderr drain thread catch up
    assert handle.state == handle.DEAD
    assert exc.value.returncode == 3 or "crash" in handle.stderr_tail()
    shutdown(handle)


def test_eval_timeout_kills_within_budget(ferry1):
    handle = _spawn(ferry1, "hang-eval", per_eval_timeout=0.3)
    start = time.monotonic()
    with pytest.raises(EvalTimeout):
        eval_state(handle, state_payload(ferry1.task, ferry1.task.initial()))
    elapsed = time.monotonic() - start
    assert elapsed < 2.0  # timeout plus modest overhead, parent never blocks
    assert handle.state == handle.DEAD
    shutdown(handle)


def test_dead_handle_refuses_eval(ferry1):
    handle = _spawn(ferry1, "negative")
    with pytest.raises(ProtocolViolation):
        eval_state(handle, state_payload(ferry1.task, ferry1.task.initial()))
    with pytest.raises(ChildCrashed):
        eval_state(handle, state_payload(ferry1.task, ferry1.task.initial()))
    shutdown(handle)


# ---------------------------------------------------------------------------
# shutdown

def test_shutdown_idempotent(ferry1):
    handle = _spawn(ferry1)
    first = shutdown(handle)
    second = shutdown(handle)
    assert not first.already_dead
    assert second.already_dead


def test_shutdown_forced_kill_on_hung_child(ferry1):
    handle = _spawn(ferry1, "ignore-shutdown")
    report = shutdown(handle, grace=0.3)
    assert report.forced


# ---------------------------------------------------------------------------
# payload determinism

def test_state_payload_sorted_and_stable(ferry1):
    task = ferry1.task
    state = task.initial()
    payload_a = state_payload(task, state)
    payload_b = state_payload(task, task.state_from_ids(task.fact_ids(state)))
    assert payload_a == sorted(payload_a)
    assert json.dumps(payload_a) == json.dumps(payload_b)


# ---------------------------------------------------------------------------
# in-process runner mirrors the contract

def test_in_process_runner_goal_count(ferry1):
    binding = load_training_task("ferry-1", ferry1.domain_text, ferry1.task_text)
    runner = InProcessRunner()
    reference = goal_count(binding.task)
    with runner.bind(CandidateSource(code=GOOD_CODE), binding) as h:
        for state in enumerate_reachable(binding.task, 1000):
            assert h.evaluate(state) == reference.evaluate(state)


def test_in_process_runner_load_error(ferry1):
    binding = load_training_task("ferry-1", ferry1.domain_text, ferry1.task_text)
    runner = InProcessRunner()
    bad = corpus.load_fixture("cand-syntax-error").code
    with pytest.raises(CandidateLoadError):
        with runner.bind(CandidateSource(code=bad), binding):
            pass
    with pytest.raises(CandidateLoadError):
        with runner.bind(CandidateSource(code="x = 1\n"), binding):
            pass  # no h defined


def test_candidate_source_id_stable():
    a = CandidateSource(code="def h(s, c):\n    return 0\n")
    b = CandidateSource(code="def h(s, c):\n    return 0\n", origin="repair",
                        iteration=3)
    assert a.id == b.id
    assert a.id != CandidateSource(code="def h(s, c):\n    return 1\n").id


def test_candidate_heuristic_adapter(ferry1):
    task = ferry1.task
    handle = _spawn(ferry1, "goalcount")
    try:
        h = CandidateHeuristic(handle, task)
        states = list(enumerate_reachable(task, 1000))
        assert h.evaluate_batch(states) == [goal_count(task).evaluate(s)
                                            for s in states]
    finally:
        shutdown(handle)
