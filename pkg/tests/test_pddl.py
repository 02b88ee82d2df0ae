"""Parser, printer round-trips, negative-precondition compilation, grounding."""

import pytest

from downhill import fixtures as corpus
from downhill.errors import (
    ArityMismatch,
    DomainMismatch,
    GoalUnreachableStatically,
    PddlSyntaxError,
    PddlValidationError,
    UnknownObjectType,
    UnsupportedRequirement,
)
from downhill.pddl import (
    compile_negative_preconditions,
    ground,
    negated_predicates,
    parse_domain,
    parse_task,
    print_domain,
    print_task,
)
from downhill.pddl.ast import Atom

from conftest import PDDL_FIXTURE_IDS
from oracles import AstInterpreter, assert_forgetful_isomorphism, naive_ground_action_count

MINIMAL_DOMAIN = """
(define (domain tiny)
  (:requirements :strips)
  (:predicates (done))
  (:action wait
    :parameters ()
    :precondition (and)
    :effect (and (done)))
)
"""


# ---------------------------------------------------------------------------
# parse_domain

def test_minimal_domain():
    domain = parse_domain(MINIMAL_DOMAIN)
    assert domain.name == "tiny"
    assert len(domain.predicates) == 1
    assert domain.predicates[0].arity == 0
    assert len(domain.schemas) == 1


def test_unsupported_requirement():
    text = MINIMAL_DOMAIN.replace(":strips", ":strips :derived-predicates")
    with pytest.raises(UnsupportedRequirement):
        parse_domain(text)


def test_unsupported_section():
    text = MINIMAL_DOMAIN.replace("(:predicates (done))",
                                  "(:functions (total-cost))\n(:predicates (done))")
    with pytest.raises(UnsupportedRequirement):
        parse_domain(text)


def test_conditional_effects_rejected():
    text = """
    (define (domain cond)
      (:requirements :strips)
      (:predicates (p) (q))
      (:action act
        :parameters ()
        :precondition (and (p))
        :effect (and (when (p) (q))))
    )
    """
    with pytest.raises(UnsupportedRequirement):
        parse_domain(text)


def test_syntax_error_has_position():
    with pytest.raises(PddlSyntaxError) as exc:
        parse_domain("(define (domain broken)")
    assert exc.value.line >= 1
    assert exc.value.column >= 1


def test_duplicate_predicates_rejected():
    text = MINIMAL_DOMAIN.replace("(:predicates (done))", "(:predicates (done) (done))")
    with pytest.raises(PddlValidationError):
        parse_domain(text)


def test_unbound_variable_rejected():
    text = """
    (define (domain free-var)
      (:requirements :strips)
      (:predicates (p ?x))
      (:action act
        :parameters (?x)
        :precondition (and (p ?y))
        :effect (and (p ?x)))
    )
    """
    with pytest.raises(PddlValidationError):
        parse_domain(text)


def test_multiple_parents_rejected():
    text = """
    (define (domain twoparents)
      (:requirements :strips :typing)
      (:types a - object a - b b)
      (:predicates (p ?x - a))
      (:action act :parameters (?x - a)
        :precondition (and (p ?x)) :effect (and (p ?x)))
    )
    """
    with pytest.raises(PddlValidationError):
        parse_domain(text)


@pytest.mark.parametrize("fixture_id", PDDL_FIXTURE_IDS)
def test_round_trip_domain_and_task(fixture_id):
    fx = corpus.load_fixture(fixture_id)
    domain = parse_domain(fx.domain_text)
    task = parse_task(fx.task_text, domain)
    assert parse_domain(print_domain(domain)) == domain
    assert parse_task(print_task(task), domain) == task


# ---------------------------------------------------------------------------
# parse_task

def test_goal_subset_of_init():
    fx = corpus.load_fixture("ferry-0")
    domain = parse_domain(fx.domain_text)
    task = parse_task(fx.task_text, domain)
    assert task.goal <= task.init


def test_undeclared_object():
    fx = corpus.load_fixture("ferry-1")
    domain = parse_domain(fx.domain_text)
    bad = fx.task_text.replace("(at c1 l0)", "(at ghost l0)")
    with pytest.raises(UnknownObjectType):
        parse_task(bad, domain)


def test_arity_mismatch():
    fx = corpus.load_fixture("ferry-1")
    domain = parse_domain(fx.domain_text)
    bad = fx.task_text.replace("(at c1 l0)", "(at c1)")
    with pytest.raises(ArityMismatch):
        parse_task(bad, domain)


def test_domain_mismatch():
    fx = corpus.load_fixture("ferry-1")
    domain = parse_domain(fx.domain_text)
    bad = fx.task_text.replace("(:domain ferry)", "(:domain boats)")
    with pytest.raises(DomainMismatch):
        parse_task(bad, domain)


def test_ferry2_counts():
    fx = corpus.load_fixture("ferry-2")
    domain = parse_domain(fx.domain_text)
    task = parse_task(fx.task_text, domain)
    cars = [n for n, t in task.objects if t == "car"]
    locations = [n for n, t in task.objects if t == "location"]
    assert len(cars) == 2
    assert len(locations) == 3
    assert len(task.goal) == 2


# ---------------------------------------------------------------------------
# compile_negative_preconditions

def test_compile_identity_without_negatives():
    fx = corpus.load_fixture("ferry-1")
    domain = parse_domain(fx.domain_text)
    task = parse_task(fx.task_text, domain)
    assert negated_predicates(domain) == frozenset()
    assert compile_negative_preconditions(domain, task) == (domain, task)


def test_compile_rewrites_and_extends_init():
    fx = corpus.load_fixture("negpre-1")
    domain = parse_domain(fx.domain_text)
    task = parse_task(fx.task_text, domain)
    assert negated_predicates(domain) == {"occupied"}
    compiled_domain, compiled_task = compile_negative_preconditions(domain, task)

    preds = {p.name for p in compiled_domain.predicates}
    assert "not-occupied" in preds
    shift = compiled_domain.schemas[0]
    assert not any(lit.negated for lit in shift.precondition)
    assert any(lit.atom.predicate == "not-occupied" for lit in shift.precondition)
    # every effect toggling occupied also toggles the twin
    assert Atom("not-occupied", ("?from",)) in shift.add
    assert Atom("not-occupied", ("?to",)) in shift.delete

    # init grows by (#groundings - #occupied): 3 slots, 1 occupied
    groundings = fx.expected["negated_groundings"]
    occupied = fx.expected["occupied_initially"]
    added = compiled_task.init - task.init
    assert len(added) == groundings - occupied
    assert all(a.predicate == "not-occupied" for a in added)
    # exactly one of occupied / not-occupied per slot
    slots = [n for n, t in task.objects if t == "slot"]
    for slot in slots:
        holds = Atom("occupied", (slot,)) in compiled_task.init
        twin = Atom("not-occupied", (slot,)) in compiled_task.init
        assert holds != twin


def test_compile_soundness_bisimulation():
    fx = corpus.load_fixture("negpre-1")
    domain = parse_domain(fx.domain_text)
    task = parse_task(fx.task_text, domain)
    interp = AstInterpreter(domain, task)
    compiled_domain, compiled_task = compile_negative_preconditions(domain, task)
    ground_task = ground(compiled_domain, compiled_task)
    assert_forgetful_isomorphism(interp, ground_task)


# ---------------------------------------------------------------------------
# ground

def test_ground_rejects_remaining_negatives():
    fx = corpus.load_fixture("negpre-1")
    domain = parse_domain(fx.domain_text)
    task = parse_task(fx.task_text, domain)
    with pytest.raises(PddlValidationError):
        ground(domain, task)


def test_ground_counting_two_params():
    text = """
    (define (domain pairs)
      (:requirements :strips :typing)
      (:types thing)
      (:predicates (linked ?x - thing ?y - thing))
      (:action link
        :parameters (?x - thing ?y - thing)
        :precondition (and)
        :effect (and (linked ?x ?y)))
    )
    """
    task_text = """
    (define (problem pairs-1)
      (:domain pairs)
      (:objects o1 o2 o3 - thing)
      (:init)
      (:goal (and (linked o1 o2)))
    )
    """
    domain = parse_domain(text)
    task = parse_task(task_text, domain)
    assert len(ground(domain, task).actions) <= 9


def test_ground_equality_pruning():
    text = """
    (define (domain pairs)
      (:requirements :strips :typing :equality)
      (:types thing)
      (:predicates (linked ?x - thing ?y - thing))
      (:action link
        :parameters (?x - thing ?y - thing)
        :precondition (and (not (= ?x ?y)))
        :effect (and (linked ?x ?y)))
    )
    """
    task_text = """
    (define (problem pairs-1)
      (:domain pairs)
      (:objects o1 o2 o3 - thing)
      (:init)
      (:goal (and (linked o1 o2)))
    )
    """
    domain = parse_domain(text)
    task = parse_task(task_text, domain)
    assert len(ground(domain, task).actions) == 6  # 3*3 minus the diagonal


@pytest.mark.parametrize("fixture_id", PDDL_FIXTURE_IDS)
def test_ground_action_count_matches_naive_enumerator(fixture_id):
    fx = corpus.load_fixture(fixture_id)
    domain = parse_domain(fx.domain_text)
    task = parse_task(fx.task_text, domain)
    compiled_domain, compiled_task = compile_negative_preconditions(domain, task)
    expected = naive_ground_action_count(compiled_domain, compiled_task)
    assert len(ground(compiled_domain, compiled_task).actions) == expected


def test_goal_unreachable_statically():
    fx = corpus.load_fixture("ferry-1")
    # goal demands (on c1) but the only adder of `on` is stripped out
    no_boarding = fx.domain_text.replace(
        ":effect (and (on ?c) (not (at ?c ?l)) (not (empty-ferry)))",
        ":effect (and (not (at ?c ?l)) (not (empty-ferry)))")
    domain = parse_domain(no_boarding)
    bad_goal = fx.task_text.replace("(:goal (and (at c1 l1)))",
                                    "(:goal (and (on c1) (at c1 l1)))")
    task = parse_task(bad_goal, domain)
    with pytest.raises(GoalUnreachableStatically):
        ground(domain, task)


def test_ground_ids_in_range(loaded):
    for fixture_id in PDDL_FIXTURE_IDS:
        task = loaded[fixture_id].task
        for action in task.actions:
            for fid in action.pre | action.add | action.delete:
                assert 0 <= fid < task.num_facts


def test_prune_static_facts_flag():
    fx = corpus.load_fixture("ferry-2")
    domain = parse_domain(fx.domain_text)
    task = parse_task(fx.task_text, domain)
    full = ground(domain, task)
    pruned = ground(domain, task, prune_static_facts=True)
    assert pruned.num_facts <= full.num_facts
    # the reachable behavior is unchanged
    from downhill import enumerate_reachable
    assert len(enumerate_reachable(pruned, 10000)) == len(enumerate_reachable(full, 10000))
