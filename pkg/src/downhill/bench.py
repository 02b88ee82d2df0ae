"""Batch evaluation: (task x heuristic x algorithm) grids under limits.

Each record runs in its own supervised child process, which enforces the
per-task memory cap via RLIMIT_AS and lets the parent kill overruns; the
wall-clock limit inside the search loop reports cooperative timeouts.
Solved plans are validated by replay before they count.  Reports:

* ``records.csv``    one row per record,
* ``summary.json``   per-suite coverage and expansion quantiles,
* ``pairwise.csv``   long-format expansion pairs over tasks solved by both
  configurations (scatter-plot ready).
"""

from __future__ import annotations

import csv
import gc
import json
import multiprocessing
import pickle
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from .candidates import CandidateHeuristic, CandidateSource, shutdown, spawn
from .errors import ConfigError
from .heuristics import BUILTIN_HEURISTICS, CountingHeuristic, make_builtin
from .pddl import load_ground_task
from .search import Limits, gbfs, hill_climb
from .statespace import ExplicitGraph, replay_plan

SOLVED = "solved"
ALGORITHMS = {"hc", "gbfs"}


@dataclass(frozen=True)
class BenchTask:
    id: str
    kind: str  # "pddl" | "graph"
    task_path: str
    domain_path: str | None = None


@dataclass(frozen=True)
class HeuristicSpec:
    name: str  # builtin name or "candidate"
    candidate_path: str | None = None
    runner: tuple[str, ...] = ()

    @property
    def label(self) -> str:
        if self.name == "candidate":
            return f"candidate:{Path(self.candidate_path).stem}"
        return self.name


@dataclass
class RunSpec:
    suite: str
    tasks: list[BenchTask]
    heuristics: list[HeuristicSpec]
    algorithms: list[str]
    limits: Limits = field(default_factory=lambda: Limits(wall_time=300.0,
                                                          memory_bytes=8 << 30))
    repetitions: int = 1
    workers: int = 1

    def __post_init__(self):
        if not self.tasks:
            raise ConfigError("the task list must not be empty")
        if not self.algorithms:
            raise ConfigError("at least one algorithm is required")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {algo!r}")
        if not self.heuristics:
            raise ConfigError("at least one heuristic is required")

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Path | None = None) -> "RunSpec":
        base = Path(base_dir) if base_dir else Path(".")

        def resolve(p):
            path = Path(p)
            return str(path if path.is_absolute() else base / path)

        domain = doc.get("domain")
        tasks = []
        for entry in doc.get("tasks", []):
            if "graph" in entry:
                tasks.append(BenchTask(entry["id"], "graph", resolve(entry["graph"])))
            else:
                if domain is None:
                    raise ConfigError(f"task {entry.get('id')} needs a domain")
                tasks.append(BenchTask(entry["id"], "pddl", resolve(entry["task"]),
                                       resolve(domain)))
        heuristics = []
        for entry in doc.get("heuristics", []):
            if isinstance(entry, str):
                if entry not in BUILTIN_HEURISTICS:
                    raise ConfigError(f"unknown heuristic {entry!r}")
                heuristics.append(HeuristicSpec(entry))
            else:
                heuristics.append(HeuristicSpec(
                    "candidate", resolve(entry["candidate"]),
                    tuple(entry.get("runner", ()))))
        limits_doc = doc.get("limits", {})
        wall = float(limits_doc.get("wall_time", 300.0))
        limits = Limits(
            wall_time=wall if wall > 0 else 1e-9,  # 0 means "expire immediately"
            max_expansions=limits_doc.get("max_expansions"),
            max_generated=limits_doc.get("max_generated"),
            memory_bytes=limits_doc.get("memory_bytes", 8 << 30),
        )
        return cls(
            suite=doc.get("suite", "suite"),
            tasks=tasks,
            heuristics=heuristics,
            algorithms=list(doc.get("algorithms", ["gbfs"])),
            limits=limits,
            repetitions=int(doc.get("repetitions", 1)),
            workers=int(doc.get("workers", 1)),
        )

    @classmethod
    def from_file(cls, path) -> "RunSpec":
        path = Path(path)
        doc = json.loads(path.read_text("utf-8"))
        return cls.from_dict(doc, base_dir=path.parent)


@dataclass(frozen=True)
class RunRecord:
    suite: str
    task: str
    algorithm: str
    heuristic: str
    outcome: str  # solved | stuck | exhausted | timeout | error
    plan_length: int | None
    expansions: int
    evaluations: int
    wall_ms: float
    rep: int = 0
    error: str = ""

    @property
    def config(self) -> str:
        return f"{self.heuristic}/{self.algorithm}"


# ---------------------------------------------------------------------------
# Worker side (one record per child process)

def _child_main(payload: dict, pipe) -> None:  # pragma: no cover - child process
    # pre-serialized so reporting a breach needs no fresh pickling
    memory_record = pickle.dumps({"outcome": "error", "error": "memory"})
    try:
        memory_bytes = payload.get("memory_bytes")
        if memory_bytes:
            import resource

            resource.setrlimit(resource.RLIMIT_AS, (memory_bytes, memory_bytes))
        record = _run_record(payload)
    except MemoryError:
        gc.collect()  # reclaim pool space so the tiny send below can succeed
        pipe.send_bytes(memory_record)
        pipe.close()
        return
    except Exception as exc:
        record = {"outcome": "error", "error": f"{type(exc).__name__}: {exc}"}
    pipe.send(record)
    pipe.close()


def _run_record(payload: dict) -> dict:
    limits = Limits(
        wall_time=payload["wall_time"],
        max_expansions=payload.get("max_expansions"),
        max_generated=payload.get("max_generated"),
    )
    if payload["kind"] == "graph":
        ts = ExplicitGraph.from_file(payload["task_path"], name=payload["task_id"])
        domain_text = task_text = ""
    else:
        domain_text = Path(payload["domain_path"]).read_text("utf-8")
        task_text = Path(payload["task_path"]).read_text("utf-8")
        ts = load_ground_task(domain_text, task_text)

    handle = None
    try:
        if payload["heuristic"] == "candidate":
            code = Path(payload["candidate_path"]).read_text("utf-8")
            candidate = CandidateSource(code=code)
            handle = spawn(list(payload["runner"]), candidate, domain_text, task_text,
                           limits)
            heuristic = CandidateHeuristic(handle, ts)
        else:
            heuristic = make_builtin(payload["heuristic"], ts)
        counting = CountingHeuristic(heuristic)
        algorithm = hill_climb if payload["algorithm"] == "hc" else gbfs
        result = algorithm(ts, counting, limits)
    finally:
        if handle is not None:
            shutdown(handle)

    outcome = result.status if result.status != "plan" else SOLVED
    plan_length = None
    error = ""
    if result.solved:
        final = replay_plan(ts, result.plan)
        if not ts.is_goal(final):
            outcome, error = "error", "plan replay did not reach a goal"
        else:
            plan_length = len(result.plan)
    return {
        "outcome": outcome,
        "plan_length": plan_length,
        "expansions": result.stats.expansions,
        "evaluations": counting.evaluations,
        "wall_ms": result.stats.wall_time * 1000.0,
        "error": error,
    }


# ---------------------------------------------------------------------------
# Parent side

def run_suite(spec: RunSpec) -> tuple[list[RunRecord], dict]:
    jobs = []
    for task in spec.tasks:
        for hspec in spec.heuristics:
            if hspec.name == "table" and task.kind != "graph":
                raise ConfigError("the table heuristic only applies to graph tasks")
            for algorithm in spec.algorithms:
                for rep in range(spec.repetitions):
                    jobs.append((task, hspec, algorithm, rep))

    records: list[RunRecord] = []
    pending = list(jobs)
    active: list[tuple] = []
    ctx = multiprocessing.get_context("fork")
    join_timeout = spec.limits.wall_time * 2 + 10

    while pending or active:
        while pending and len(active) < max(1, spec.workers):
            job = pending.pop(0)
            payload = _payload(spec, *job)
            parent_conn, child_conn = ctx.Pipe(duplex=False)
            process = ctx.Process(target=_child_main, args=(payload, child_conn))
            process.start()
            child_conn.close()
            active.append((job, process, parent_conn))
        job, process, conn = active.pop(0)
        task, hspec, algorithm, rep = job
        result: dict
        if conn.poll(join_timeout):
            result = conn.recv()
            process.join()
        else:
            process.terminate()
            process.join()
            result = {"outcome": "timeout", "error": "supervisor killed the worker"}
        if process.exitcode not in (0, None) and result.get("outcome") != "timeout":
            result = {"outcome": "error",
                      "error": f"worker exited with {process.exitcode}"}
        records.append(RunRecord(
            suite=spec.suite, task=task.id, algorithm=algorithm,
            heuristic=hspec.label,
            outcome=result.get("outcome", "error"),
            plan_length=result.get("plan_length"),
            expansions=int(result.get("expansions", 0)),
            evaluations=int(result.get("evaluations", 0)),
            wall_ms=float(result.get("wall_ms", 0.0)),
            rep=rep, error=result.get("error", ""),
        ))
    return records, summarize(records)


def _payload(spec: RunSpec, task: BenchTask, hspec: HeuristicSpec,
             algorithm: str, rep: int) -> dict:
    return {
        "task_id": task.id,
        "kind": task.kind,
        "task_path": task.task_path,
        "domain_path": task.domain_path,
        "heuristic": hspec.name,
        "candidate_path": hspec.candidate_path,
        "runner": list(hspec.runner),
        "algorithm": algorithm,
        "rep": rep,
        "wall_time": spec.limits.wall_time,
        "max_expansions": spec.limits.max_expansions,
        "max_generated": spec.limits.max_generated,
        "memory_bytes": spec.limits.memory_bytes,
    }


def summarize(records: list[RunRecord]) -> dict:
    configs = sorted({r.config for r in records})
    reps = sorted({r.rep for r in records})
    coverage = {}
    quantiles = {}
    for config in configs:
        per_rep = []
        for rep in reps:
            solved = {r.task for r in records
                      if r.config == config and r.rep == rep and r.outcome == SOLVED}
            per_rep.append(len(solved))
        coverage[config] = {
            "mean": statistics.mean(per_rep) if per_rep else 0.0,
            "std": statistics.pstdev(per_rep) if len(per_rep) > 1 else 0.0,
            "per_rep": per_rep,
        }
        expansions = sorted(r.expansions for r in records
                            if r.config == config and r.outcome == SOLVED)
        if expansions:
            quantiles[config] = {
                "q25": _quantile(expansions, 0.25),
                "q50": _quantile(expansions, 0.50),
                "q75": _quantile(expansions, 0.75),
            }
        else:
            quantiles[config] = {"q25": None, "q50": None, "q75": None}
    return {
        "records": len(records),
        "coverage": coverage,
        "expansion_quantiles": quantiles,
    }


def _quantile(sorted_values: list[int], q: float) -> float:
    if not sorted_values:
        return float("nan")
    position = q * (len(sorted_values) - 1)
    low = int(position)
    high = min(low + 1, len(sorted_values) - 1)
    fraction = position - low
    return sorted_values[low] * (1 - fraction) + sorted_values[high] * fraction


# ---------------------------------------------------------------------------
# Reports

CSV_COLUMNS = ("suite", "task", "algorithm", "heuristic", "outcome",
               "plan_length", "expansions", "evaluations", "wall_ms")


def write_report(records: list[RunRecord], out_dir, summary: dict | None = None) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records_path = out / "records.csv"
    with open(records_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([r.suite, r.task, r.algorithm, r.heuristic, r.outcome,
                             "" if r.plan_length is None else r.plan_length,
                             r.expansions, r.evaluations, f"{r.wall_ms:.3f}"])

    summary = summary if summary is not None else summarize(records)
    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2), encoding="utf-8")

    pairwise_path = out / "pairwise.csv"
    _write_pairwise(records, pairwise_path)
    return {"records": str(records_path), "summary": str(summary_path),
            "pairwise": str(pairwise_path)}


def _write_pairwise(records: list[RunRecord], path: Path) -> None:
    # mean expansions per (config, task), restricted to solved records
    solved: dict[tuple[str, str], list[int]] = {}
    for r in records:
        if r.outcome == SOLVED:
            solved.setdefault((r.config, r.task), []).append(r.expansions)
    configs = sorted({config for config, _ in solved})
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["task", "config_a", "config_b",
                         "expansions_a", "expansions_b"])
        for i, config_a in enumerate(configs):
            for config_b in configs[i + 1:]:
                tasks_a = {t for c, t in solved if c == config_a}
                tasks_b = {t for c, t in solved if c == config_b}
                for task in sorted(tasks_a & tasks_b):
                    mean_a = statistics.mean(solved[(config_a, task)])
                    mean_b = statistics.mean(solved[(config_b, task)])
                    writer.writerow([task, config_a, config_b,
                                     f"{mean_a:g}", f"{mean_b:g}"])
