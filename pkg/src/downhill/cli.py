"""Command-line entry point.

Exit codes: 0 success / verdict pass, 1 verdict fail (counterexample found,
task unsolved, oracle fail, budget exhausted), 2 usage error, 3 internal
error.
"""

from __future__ import annotations

import argparse
import json
import shlex
import sys
from contextlib import contextmanager, nullcontext
from pathlib import Path

from .bench import RunSpec, run_suite, write_report
from .candidates import CandidateHeuristic, CandidateSource, shutdown, spawn
from .errors import DownhillError
from .heuristics import make_builtin
from .pddl import (
    compile_negative_preconditions,
    ground,
    negated_predicates,
    parse_domain,
    parse_task,
)
from .repair import (
    COVERAGE,
    DIRECT_PROPERTY,
    PromptTemplates,
    RepairConfig,
    load_training_task,
    run_repair,
)
from .search import Limits, gbfs, hill_climb
from .statespace import ExplicitGraph
from .synth import RemoteSynthesizer, ScriptedSynthesizer, SynthesizerConfig
from .validator import FAIL, check_direct, oracle_dda, oracle_direct

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="downhill")
    sub = parser.add_subparsers(dest="command", required=True)

    p_parse = sub.add_parser("parse", help="parse and ground a PDDL pair")
    p_parse.add_argument("domain")
    p_parse.add_argument("task")
    p_parse.add_argument("--prune-static-facts", action="store_true")

    p_solve = sub.add_parser("solve", help="run one search on one task")
    p_solve.add_argument("--algo", choices=["hc", "gbfs"], required=True)
    p_solve.add_argument("--heuristic", required=True,
                         help="ff|goal-count|blind|table|candidate:<file>")
    p_solve.add_argument("--runner", default=None,
                         help="runner command for candidate heuristics")
    p_solve.add_argument("--time-limit", type=float, default=300.0)
    p_solve.add_argument("--max-expansions", type=int, default=None)
    p_solve.add_argument("--verbose", action="store_true")
    p_solve.add_argument("inputs", nargs="+",
                         help="<domain> <task> for PDDL, or a graph .json file")

    p_val = sub.add_parser("validate", help="check the direct property")
    p_val.add_argument("--heuristic", required=True)
    p_val.add_argument("--runner", default=None)
    p_val.add_argument("--time-limit", type=float, default=30.0)
    p_val.add_argument("inputs", nargs="+",
                       help="<domain> <task>... for PDDL, or graph .json files")

    p_oracle = sub.add_parser("oracle", help="exact verdicts on small tasks")
    p_oracle.add_argument("--property", choices=["direct", "dda"], required=True)
    p_oracle.add_argument("--heuristic", required=True)
    p_oracle.add_argument("--cap", type=int, default=10000)
    p_oracle.add_argument("inputs", nargs="+")

    p_synth = sub.add_parser("synthesize", help="run the repair loop")
    p_synth.add_argument("--config", required=True)

    p_bench = sub.add_parser("bench", help="run a benchmark suite")
    p_bench.add_argument("--spec", required=True)
    p_bench.add_argument("--out", default="bench-out")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        handler = {
            "parse": _cmd_parse,
            "solve": _cmd_solve,
            "validate": _cmd_validate,
            "oracle": _cmd_oracle,
            "synthesize": _cmd_synthesize,
            "bench": _cmd_bench,
        }[args.command]
        return handler(args)
    except DownhillError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


# ---------------------------------------------------------------------------
# Input plumbing

def _load_inputs(inputs: list[str]):
    """Yields (task_id, transition_system, domain_text, task_text) tuples."""
    if all(path.endswith(".json") for path in inputs):
        for path in inputs:
            graph = ExplicitGraph.from_file(path, name=Path(path).stem)
            yield Path(path).stem, graph, "", ""
        return
    if len(inputs) < 2:
        raise DownhillError("expected <domain> <task>... or graph .json files")
    domain_text = Path(inputs[0]).read_text("utf-8")
    domain = parse_domain(domain_text)
    for path in inputs[1:]:
        task_text = Path(path).read_text("utf-8")
        task_ast = parse_task(task_text, domain)
        compiled_domain, compiled_task = compile_negative_preconditions(domain, task_ast)
        yield Path(path).stem, ground(compiled_domain, compiled_task), domain_text, task_text


@contextmanager
def _make_heuristic(spec: str, ts, runner: str | None, domain_text: str, task_text: str):
    if spec.startswith("candidate:"):
        if not runner:
            raise DownhillError("candidate heuristics need --runner")
        code = Path(spec.split(":", 1)[1]).read_text("utf-8")
        handle = spawn(shlex.split(runner), CandidateSource(code=code),
                       domain_text, task_text)
        try:
            yield CandidateHeuristic(handle, ts)
        finally:
            shutdown(handle)
    else:
        with nullcontext():
            yield make_builtin(spec, ts)


# ---------------------------------------------------------------------------
# Subcommands

def _cmd_parse(args) -> int:
    domain_text = Path(args.domain).read_text("utf-8")
    task_text = Path(args.task).read_text("utf-8")
    domain = parse_domain(domain_text)
    task = parse_task(task_text, domain)
    negated = negated_predicates(domain)
    compiled_domain, compiled_task = compile_negative_preconditions(domain, task)
    ground_task = ground(compiled_domain, compiled_task,
                         prune_static_facts=args.prune_static_facts)
    print(f"domain: {domain.name}")
    print(f"task: {task.name}")
    print(f"negative preconditions compiled: {', '.join(sorted(negated)) or 'none'}")
    print(f"facts: {ground_task.num_facts}")
    print(f"actions: {len(ground_task.actions)}")
    print(f"init size: {len(ground_task.initial_ids)}")
    print(f"goal size: {len(ground_task.goal)}")
    return EXIT_PASS


class _VerboseSpace:
    """Transition-system proxy that logs one line per expansion."""

    def __init__(self, inner):
        self._inner = inner
        self._count = 0

    def initial(self):
        return self._inner.initial()

    def is_goal(self, state):
        return self._inner.is_goal(state)

    def successors(self, state):
        succ = self._inner.successors(state)
        self._count += 1
        facts = " ".join(self._inner.describe_state(state))
        print(f"expand #{self._count} ({len(succ)} successors): {facts}",
              file=sys.stderr)
        return succ

    def describe_state(self, state):
        return self._inner.describe_state(state)


def _cmd_solve(args) -> int:
    limits = Limits(wall_time=args.time_limit, max_expansions=args.max_expansions)
    algorithm = hill_climb if args.algo == "hc" else gbfs
    for task_id, ts, domain_text, task_text in _load_inputs(args.inputs):
        with _make_heuristic(args.heuristic, ts, args.runner,
                             domain_text, task_text) as h:
            space = _VerboseSpace(ts) if args.verbose else ts
            result = algorithm(space, h, limits)
        stats = result.stats
        print(f"[{task_id}] {result.status}  expansions={stats.expansions} "
              f"generated={stats.generated} wall={stats.wall_time:.3f}s")
        if result.solved:
            print(f"plan ({len(result.plan)} steps):")
            for label in result.plan:
                print(f"  {label}")
        elif result.status == "stuck":
            print(f"stuck at h={result.stuck_h} with successors:")
            for label, value in result.stuck_successors:
                print(f"  {label}: {value}")
        if not result.solved:
            return EXIT_FAIL
    return EXIT_PASS


def _cmd_validate(args) -> int:
    entries = list(_load_inputs(args.inputs))
    single = len(entries) == 1
    for task_id, ts, domain_text, task_text in entries:
        with _make_heuristic(args.heuristic, ts, args.runner,
                             domain_text, task_text) as h:
            outcome = check_direct(ts, h, args.time_limit, task_id=task_id)
        if outcome.status == FAIL:
            print(outcome.counterexample.to_json())
            return EXIT_FAIL
        label = "Pass" if outcome.status == "pass" else "PresumedPass"
        print(label if single else f"{task_id}: {label}")
    return EXIT_PASS


def _cmd_oracle(args) -> int:
    failed = False
    for task_id, ts, domain_text, task_text in _load_inputs(args.inputs):
        with _make_heuristic(args.heuristic, ts, None, domain_text, task_text) as h:
            if args.property == "direct":
                verdict = oracle_direct(ts, h, args.cap)
            else:
                verdict = oracle_dda(ts, h, args.cap)
        if verdict.passed:
            print(f"{task_id}: Pass")
        else:
            print(f"{task_id}: Fail ({verdict.reason})")
            failed = True
    return EXIT_FAIL if failed else EXIT_PASS


def _cmd_synthesize(args) -> int:
    config_path = Path(args.config)
    doc = json.loads(config_path.read_text("utf-8"))
    base = config_path.parent

    def resolve(p):
        path = Path(p)
        return path if path.is_absolute() else base / path

    domain_text = resolve(doc["domain"]).read_text("utf-8")
    tasks = [load_training_task(Path(p).stem, domain_text,
                                resolve(p).read_text("utf-8"))
             for p in doc["tasks"]]

    templates = PromptTemplates.default()
    if "templates" in doc:
        templates = PromptTemplates.from_paths(
            {k: str(resolve(v)) for k, v in doc["templates"].items()})

    mode = doc.get("mode", DIRECT_PROPERTY)
    coverage_doc = doc.get("coverage_limits", {})
    config = RepairConfig(
        training_tasks=tasks,
        max_iterations=int(doc.get("max_iterations", 10)),
        per_task_validation_limit=float(doc.get("per_task_limit", 30.0)),
        feedback_mode=COVERAGE if mode == COVERAGE else DIRECT_PROPERTY,
        coverage_limits=Limits(
            wall_time=float(coverage_doc.get("wall_time", 30.0)),
            max_expansions=coverage_doc.get("max_expansions"),
        ),
        templates=templates,
        out_dir=resolve(doc.get("out_dir", "synth-out")),
    )

    synth_doc = doc.get("synthesizer", {})
    if synth_doc.get("type") == "remote":
        synth = RemoteSynthesizer(SynthesizerConfig(
            endpoint=synth_doc["endpoint"],
            model=synth_doc["model"],
            api_key_env=synth_doc.get("api_key_env", "DOWNHILL_API_KEY"),
            request_timeout=float(synth_doc.get("request_timeout", 120.0)),
            max_retries=int(synth_doc.get("max_retries", 2)),
            decoding=synth_doc.get("decoding", {}),
        ))
    else:
        script = list(synth_doc.get("script", []))
        for path in synth_doc.get("script_files", []):
            script.append(resolve(path).read_text("utf-8"))
        if not script:
            raise DownhillError("scripted synthesizer needs script or script_files")
        synth = ScriptedSynthesizer(script)

    runner = None
    runner_doc = doc.get("runner", {})
    if runner_doc.get("type") == "subprocess":
        from .candidates import SubprocessRunner

        runner = SubprocessRunner(runner_doc["command"])

    result = run_repair(config, synth, runner)
    status = "converged" if result.converged else "budget exhausted"
    print(f"{status} after {result.iterations_used} iteration(s); "
          f"transcript in {config.out_dir}")
    return EXIT_PASS if result.converged else EXIT_FAIL


def _cmd_bench(args) -> int:
    spec = RunSpec.from_file(args.spec)
    records, summary = run_suite(spec)
    paths = write_report(records, args.out, summary)
    print(json.dumps(summary, indent=2))
    for kind, path in paths.items():
        print(f"{kind}: {path}")
    return EXIT_PASS


def console_main() -> None:  # pragma: no cover - thin wrapper
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
