"""downhill: synthesize and verify direct heuristics for PDDL planning.

A heuristic is *direct* when every state reachable from the initial state
via strictly improving transitions has a strictly improving successor and
no improving step enters an unsolvable state; hill climbing guided by such
a heuristic walks straight to a goal.  This package parses and grounds
PDDL, checks the property with a DFS that emits actionable
counterexamples, repairs candidate heuristics in a synthesizer loop, and
benchmarks the results with hill climbing and greedy best-first search.
"""

from ._kernels import backend as kernel_backend
from .heuristics import best_supporter_trace, blind, ff, goal_count, table_heuristic
from .pddl import (
    compile_negative_preconditions,
    ground,
    load_ground_task,
    parse_domain,
    parse_task,
)
from .search import Limits, gbfs, hill_climb
from .statespace import (
    BitsetState,
    ExplicitGraph,
    GroundAction,
    GroundTask,
    applicable_actions,
    apply_action,
    enumerate_reachable,
    replay_plan,
    successors,
)
from .validator import (
    Counterexample,
    check_direct,
    check_direct_suite,
    oracle_dda,
    oracle_direct,
)

__version__ = "0.1.0"

__all__ = [
    "BitsetState",
    "Counterexample",
    "ExplicitGraph",
    "GroundAction",
    "GroundTask",
    "Limits",
    "applicable_actions",
    "apply_action",
    "best_supporter_trace",
    "blind",
    "check_direct",
    "check_direct_suite",
    "compile_negative_preconditions",
    "enumerate_reachable",
    "ff",
    "gbfs",
    "goal_count",
    "ground",
    "hill_climb",
    "kernel_backend",
    "load_ground_task",
    "oracle_dda",
    "oracle_direct",
    "parse_domain",
    "parse_task",
    "replay_plan",
    "successors",
    "table_heuristic",
]
