"""Successor generation, goal tests, reachability, explicit graphs."""

import numpy as np
import pytest

from downhill import fixtures as corpus
from downhill.errors import InapplicableAction, StateSpaceTooLarge
from downhill.pddl import parse_domain, parse_task
from downhill.statespace import (
    ExplicitGraph,
    GroundAction,
    GroundTask,
    applicable_actions,
    apply_action,
    enumerate_reachable,
    replay_plan,
    successors,
)

from conftest import PDDL_FIXTURE_IDS
from oracles import AstInterpreter, bfs_states


def tiny_task() -> GroundTask:
    actions = [
        GroundAction("(flip)", frozenset({0}), frozenset({1}), frozenset({0}), index=0),
        GroundAction("(noop)", frozenset(), frozenset(), frozenset(), index=1),
    ]
    return GroundTask(["(p)", "(q)"], actions, initial_ids={0}, goal_ids={1})


# ---------------------------------------------------------------------------
# applicable / apply

def test_applicable_empty_state():
    task = tiny_task()
    empty = task.state_from_ids([])
    names = [a.name for a in applicable_actions(task, empty)]
    assert names == ["(noop)"]  # (flip) requires fact 0


def test_applicable_when_pre_equals_state():
    task = tiny_task()
    state = task.state_from_ids([0])
    names = [a.name for a in applicable_actions(task, state)]
    assert names == ["(flip)", "(noop)"]


def test_apply_identity():
    task = tiny_task()
    state = task.state_from_ids([0])
    noop = task.actions[1]
    assert apply_action(task, state, noop) == state


def test_apply_del_then_add():
    task = tiny_task()
    state = task.state_from_ids([0])
    flip = task.actions[0]
    assert task.fact_ids(apply_action(task, state, flip)) == (1,)


def test_apply_raises_when_inapplicable():
    task = tiny_task()
    empty = task.state_from_ids([])
    with pytest.raises(InapplicableAction):
        apply_action(task, empty, task.actions[0])


@pytest.mark.parametrize("fixture_id", PDDL_FIXTURE_IDS)
def test_successors_match_reference_interpreter(fixture_id):
    """Grounded successor function agrees with the AST interpreter everywhere."""
    fx = corpus.load_fixture(fixture_id)
    domain = parse_domain(fx.domain_text)
    task_ast = parse_task(fx.task_text, domain)
    from downhill.pddl import compile_negative_preconditions
    cd, ct = compile_negative_preconditions(domain, task_ast)
    interp = AstInterpreter(cd, ct)
    ground_task = fx.task

    for state in enumerate_reachable(ground_task, 10000):
        described = frozenset(ground_task.describe_state(state))
        impl = {(label, frozenset(ground_task.describe_state(s)))
                for label, s in ground_task.successors(state)}
        ref = {(label, frozenset(interp.describe_state(s)))
               for label, s in interp.successors(
                   frozenset(tuple(a.strip("()").split()) for a in described))}
        assert impl == ref


# ---------------------------------------------------------------------------
# explicit graphs and successor order

def test_fig2a_successor_order(loaded):
    graph = loaded["fig2a"].graph
    assert [label for label, _ in successors(graph, "s0")] == ["to-a", "to-b"]
    assert [s for _, s in successors(graph, "s0")] == ["a", "b"]


def test_goal_node_has_no_successors(loaded):
    graph = loaded["fig2a"].graph
    assert successors(graph, "g") == []


def test_dead_end_node():
    graph = ExplicitGraph(["s", "x"], [["s", "go", "x"]], "s", ["s"])
    assert successors(graph, "x") == []


def test_graph_loader_rejects_unknown_nodes():
    with pytest.raises(ValueError):
        ExplicitGraph(["a"], [["a", "l", "zzz"]], "a", ["a"])
    with pytest.raises(ValueError):
        ExplicitGraph(["a"], [], "zzz", ["a"])


# ---------------------------------------------------------------------------
# enumerate_reachable

def test_fig2a_has_six_states(loaded):
    assert len(enumerate_reachable(loaded["fig2a"].graph, 100)) == 6


def test_single_state_graph():
    graph = ExplicitGraph(["s0"], [], "s0", ["s0"])
    assert enumerate_reachable(graph, 10) == frozenset({"s0"})


def test_ferry_reachable_matches_independent_bfs(ferry2):
    task = ferry2.task
    ours = enumerate_reachable(task, 100000)
    theirs = bfs_states(task.initial(), task.successors)
    assert ours == frozenset(theirs)


def test_cap_enforced(ferry2):
    with pytest.raises(StateSpaceTooLarge):
        enumerate_reachable(ferry2.task, 10)


def test_closure_soundness(ferry2):
    """Every reachable state is reachable by replaying recorded labels."""
    task = ferry2.task
    paths = bfs_states(task.initial(), task.successors)
    for state, labels in paths.items():
        assert replay_plan(task, labels) == state


# ---------------------------------------------------------------------------
# determinism and state identity

def test_successor_determinism(ferry2):
    task = ferry2.task
    for state in list(enumerate_reachable(task, 1000))[:10]:
        first = task.successors(state)
        second = task.successors(state)
        assert [(l, s) for l, s in first] == [(l, s) for l, s in second]


def test_apply_never_raises_on_applicable(ferry2):
    task = ferry2.task
    for state in enumerate_reachable(task, 1000):
        for action in applicable_actions(task, state):
            apply_action(task, state, action)


def test_bitset_state_identity():
    task = tiny_task()
    a = task.state_from_ids([0])
    b = task.state_from_ids([0])
    c = task.state_from_ids([1])
    assert a == b and hash(a) == hash(b)
    assert a != c
    assert len({a, b, c}) == 2


def test_bitset_state_immutable():
    task = tiny_task()
    state = task.state_from_ids([0])
    with pytest.raises(AttributeError):
        state.words = None
    with pytest.raises(ValueError):
        state.words[0] = np.uint64(7)
