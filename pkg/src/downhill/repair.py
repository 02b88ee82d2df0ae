"""Counterexample-driven repair loop: generate, validate, feed back.

One iteration = one synthesizer call.  The first iteration uses the
initial prompt (domain, smallest and largest training tasks, two example
heuristics from unrelated domains, planner excerpt, checklist; it does
not name the property being validated).  After a failure, the repair
prompt carries the property definition, the failing task, the serialized
feedback, and every previously generated candidate next to its feedback.

Validation modes:

* ``direct``: the property check over the training suite, stopping at the
  first counterexample;
* ``coverage``: the ablation, where candidates are scored by whether greedy
  best-first search solves each training task within the limit, and the
  feedback names the unsolved task and its expansion count.

Training tasks are ordered ascending by a size key (object count, then
file size) so cheap counterexamples surface first.  A candidate that
crashes (load or eval) consumes one iteration and produces error feedback.
A validation timeout counts as a pass for convergence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .candidates import CandidateSource, InProcessRunner
from .errors import (
    CandidateLoadError,
    HandshakeTimeout,
    HeuristicEvaluationFailure,
    NoCodeBlock,
)
from .heuristics import CountingHeuristic
from .pddl import compile_negative_preconditions, ground, parse_domain, parse_task
from .search import Limits, gbfs
from .synth import Prompt, extract_candidate, render_template
from .validator import Counterexample, check_direct_suite

DIRECT_PROPERTY = "direct"
COVERAGE = "coverage"


# ---------------------------------------------------------------------------
# Training tasks

@dataclass
class TrainingTask:
    id: str
    domain_text: str
    task_text: str
    task: object  # GroundTask
    objects: dict[str, str]
    domain_name: str = ""
    size_key: tuple[int, int] = (0, 0)


def load_training_task(task_id: str, domain_text: str, task_text: str) -> TrainingTask:
    domain = parse_domain(domain_text)
    task_ast = parse_task(task_text, domain)
    compiled_domain, compiled_task = compile_negative_preconditions(domain, task_ast)
    ground_task = ground(compiled_domain, compiled_task)
    return TrainingTask(
        id=task_id,
        domain_text=domain_text,
        task_text=task_text,
        task=ground_task,
        objects=task_ast.object_map(),
        domain_name=domain.name,
        size_key=(len(task_ast.objects), len(task_text)),
    )


def load_training_tasks(domain_text: str, task_texts: dict[str, str]) -> list[TrainingTask]:
    """Parse and ground tasks, sorted ascending by the size key."""
    tasks = [load_training_task(task_id, domain_text, text)
             for task_id, text in task_texts.items()]
    tasks.sort(key=lambda t: (t.size_key, t.id))
    return tasks


# ---------------------------------------------------------------------------
# Feedback

@dataclass(frozen=True)
class Feedback:
    kind: str  # "counterexample" | "error" | "coverage"
    counterexample: Counterexample | None = None
    phase: str | None = None  # "load" | "eval" for error feedback
    message: str | None = None
    stderr_tail: str | None = None
    task_id: str | None = None
    expansions: int | None = None

    def render(self) -> str:
        if self.kind == "counterexample":
            return self.counterexample.to_json()
        if self.kind == "error":
            text = (f"The candidate failed during {self.phase} with the following "
                    f"error; fix it:\n{self.message}")
            if self.stderr_tail:
                text += f"\n\nCaptured error output:\n{self.stderr_tail}"
            return text
        return (f"The heuristic failed to solve training task {self.task_id!r} "
                f"within the limit; the search expanded {self.expansions} states "
                "before giving up. Provide a heuristic with better guidance.")

    def to_json_dict(self) -> dict:
        doc = {"kind": self.kind}
        if self.counterexample is not None:
            doc["counterexample"] = self.counterexample.to_json_dict()
        for key in ("phase", "message", "stderr_tail", "task_id", "expansions"):
            value = getattr(self, key)
            if value is not None:
                doc[key] = value
        return doc


def counterexample_feedback(ce: Counterexample) -> Feedback:
    return Feedback(kind="counterexample", counterexample=ce, task_id=ce.task_id)


def error_feedback(phase: str, message: str, stderr_tail: str = "",
                   task_id: str | None = None) -> Feedback:
    return Feedback(kind="error", phase=phase, message=message,
                    stderr_tail=stderr_tail or None, task_id=task_id)


def coverage_feedback(task_id: str, expansions: int) -> Feedback:
    return Feedback(kind="coverage", task_id=task_id, expansions=expansions)


# ---------------------------------------------------------------------------
# Configuration and transcript

def _default_template(name: str) -> str:
    return resources.files("downhill").joinpath("templates", name).read_text("utf-8")


@dataclass
class PromptTemplates:
    initial: str
    repair: str
    coverage: str
    checklist: str
    planner_excerpt: str

    @classmethod
    def default(cls) -> "PromptTemplates":
        return cls(
            initial=_default_template("initial_prompt.txt"),
            repair=_default_template("repair_prompt.txt"),
            coverage=_default_template("coverage_prompt.txt"),
            checklist=_default_template("checklist.txt"),
            planner_excerpt=_default_template("planner_excerpt.txt"),
        )

    @classmethod
    def from_paths(cls, paths: dict[str, str]) -> "PromptTemplates":
        base = cls.default()
        for key, path in paths.items():
            setattr(base, key, Path(path).read_text("utf-8"))
        return base


def default_example_heuristics() -> list[str]:
    return [
        _default_template("example_courier.py"),
        _default_template("example_elevator.py"),
    ]


@dataclass
class RepairConfig:
    training_tasks: list[TrainingTask]
    max_iterations: int = 10
    per_task_validation_limit: float = 30.0
    feedback_mode: str = DIRECT_PROPERTY
    coverage_limits: Limits = field(default_factory=lambda: Limits(wall_time=30.0))
    templates: PromptTemplates = field(default_factory=PromptTemplates.default)
    example_heuristics: list[str] = field(default_factory=default_example_heuristics)
    out_dir: Path | None = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not self.training_tasks:
            raise ValueError("training task list must not be empty")
        if len(self.example_heuristics) < 2:
            raise ValueError("the initial prompt needs two example heuristics")
        if self.feedback_mode not in (DIRECT_PROPERTY, COVERAGE):
            raise ValueError(f"unknown feedback mode {self.feedback_mode!r}")


@dataclass
class IterationRecord:
    index: int
    prompt: Prompt
    response: str
    candidate: CandidateSource | None
    feedback: Feedback | None
    success: bool
    validation_wall_time: float = 0.0
    evaluations: int = 0

    def to_json_dict(self) -> dict:
        return {
            "index": self.index,
            "prompt": self.prompt.to_json_list(),
            "response": self.response,
            "candidate": None if self.candidate is None else {
                "code": self.candidate.code,
                "language_tag": self.candidate.language_tag,
                "origin": self.candidate.origin,
                "iteration": self.candidate.iteration,
                "id": self.candidate.id,
            },
            "feedback": None if self.feedback is None else self.feedback.to_json_dict(),
            "success": self.success,
            "validation_wall_time": self.validation_wall_time,
            "evaluations": self.evaluations,
        }


@dataclass
class RepairTranscript:
    iterations: list[IterationRecord] = field(default_factory=list)

    @property
    def candidates_generated(self) -> int:
        return sum(1 for it in self.iterations if it.candidate is not None)

    @property
    def validation_wall_time(self) -> float:
        return sum(it.validation_wall_time for it in self.iterations)

    @property
    def evaluations(self) -> int:
        return sum(it.evaluations for it in self.iterations)

    def save_jsonl(self, path: Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for record in self.iterations:
                fh.write(json.dumps(record.to_json_dict()) + "\n")


@dataclass
class RepairResult:
    converged: bool
    candidate: CandidateSource | None
    transcript: RepairTranscript

    @property
    def iterations_used(self) -> int:
        return len(self.transcript.iterations)


# ---------------------------------------------------------------------------
# Prompt builders

def build_initial_prompt(domain_text: str, smallest_task_text: str,
                         largest_task_text: str, example_heuristics: list[str],
                         planner_excerpt: str, checklist: str,
                         template: str | None = None) -> Prompt:
    if template is None:
        template = _default_template("initial_prompt.txt")
    body = render_template(
        template,
        domain_text=domain_text,
        smallest_task=smallest_task_text,
        largest_task=largest_task_text,
        example_1=example_heuristics[0],
        example_2=example_heuristics[1],
        planner_excerpt=planner_excerpt,
        checklist=checklist,
    )
    return Prompt(messages=(
        {"role": "system", "content": "You write heuristic functions for a classical planner."},
        {"role": "user", "content": body},
    ))


def _render_history(history: RepairTranscript) -> str:
    if not history.iterations:
        return "(none yet)"
    sections = []
    count = 0
    for record in history.iterations:
        if record.candidate is None or record.feedback is None:
            continue
        count += 1
        sections.append(
            f"### Previously generated heuristic {count}\n"
            f"```python\n{record.candidate.code}```\n"
            f"Feedback:\n{record.feedback.render()}"
        )
    return "\n\n".join(sections) if sections else "(none yet)"


def build_repair_prompt(domain_text: str, failing_task_text: str, feedback: Feedback,
                        history: RepairTranscript, checklist: str,
                        template: str | None = None) -> Prompt:
    if template is None:
        template = _default_template("repair_prompt.txt")
    body = render_template(
        template,
        domain_text=domain_text,
        failing_task=failing_task_text,
        feedback=feedback.render(),
        history=_render_history(history),
        checklist=checklist,
    )
    return Prompt(messages=(
        {"role": "system", "content": "You write heuristic functions for a classical planner."},
        {"role": "user", "content": body},
    ))


# ---------------------------------------------------------------------------
# The loop

def run_repair(config: RepairConfig, synth, runner=None) -> RepairResult:
    """Generate -> validate -> feed back until convergence or budget."""
    runner = runner or InProcessRunner()
    tasks = sorted(config.training_tasks, key=lambda t: (t.size_key, t.id))
    by_id = {t.id: t for t in tasks}
    domain_text = tasks[0].domain_text
    smallest, largest = tasks[0], tasks[-1]

    transcript = RepairTranscript()
    feedback: Feedback | None = None
    last_candidate: CandidateSource | None = None

    for iteration in range(1, config.max_iterations + 1):
        if iteration == 1:
            prompt = build_initial_prompt(
                domain_text, smallest.task_text, largest.task_text,
                config.example_heuristics, config.templates.planner_excerpt,
                config.templates.checklist, template=config.templates.initial,
            )
        else:
            failing = by_id.get(feedback.task_id or "", smallest)
            template = (config.templates.repair if config.feedback_mode == DIRECT_PROPERTY
                        else config.templates.coverage)
            prompt = build_repair_prompt(
                domain_text, failing.task_text, feedback, transcript,
                config.templates.checklist, template=template,
            )

        response = synth.complete(prompt)
        origin = "initial" if iteration == 1 else "repair"
        try:
            candidate = extract_candidate(response, origin=origin, iteration=iteration)
        except NoCodeBlock as exc:
            feedback = error_feedback("load", str(exc))
            transcript.iterations.append(IterationRecord(
                iteration, prompt, response, None, feedback, success=False))
            continue
        last_candidate = candidate

        if config.feedback_mode == DIRECT_PROPERTY:
            feedback, wall, evals = _validate_direct(config, runner, candidate, tasks)
        else:
            feedback, wall, evals = _validate_coverage(config, runner, candidate, tasks)

        success = feedback is None
        transcript.iterations.append(IterationRecord(
            iteration, prompt, response, candidate, feedback, success=success,
            validation_wall_time=wall, evaluations=evals))
        if success:
            _persist(config, transcript, candidate)
            return RepairResult(True, candidate, transcript)

    _persist(config, transcript, last_candidate)
    return RepairResult(False, last_candidate, transcript)


def run_coverage_feedback(config: RepairConfig, synth, runner=None) -> RepairResult:
    if config.feedback_mode != COVERAGE:
        raise ValueError("run_coverage_feedback requires feedback_mode='coverage'")
    return run_repair(config, synth, runner)


def _validate_direct(config, runner, candidate, tasks):
    def provider(task_id, ts):
        return runner.bind(candidate, _binding(tasks, task_id))

    try:
        suite = check_direct_suite([(t.id, t.task) for t in tasks], provider,
                                   config.per_task_validation_limit)
    except CandidateLoadError as exc:
        return error_feedback("load", exc.message, exc.stderr_tail), 0.0, 0
    except HandshakeTimeout as exc:
        # e.g. candidate code that hangs at import time
        return error_feedback("load", str(exc)), 0.0, 0
    except HeuristicEvaluationFailure as exc:
        stderr = getattr(exc.cause, "stderr_tail", "") if exc.cause else ""
        return (error_feedback("eval", exc.message, stderr, task_id=exc.task_id),
                0.0, 0)
    wall = sum(outcome.wall_time for _, outcome in suite.entries)
    evals = sum(outcome.evaluations for _, outcome in suite.entries)
    if suite.passed:
        return None, wall, evals
    return counterexample_feedback(suite.failure), wall, evals


def _validate_coverage(config, runner, candidate, tasks):
    wall = 0.0
    evals = 0
    for training in tasks:
        try:
            with runner.bind(candidate, training) as h:
                counting = CountingHeuristic(h)
                result = gbfs(training.task, counting, config.coverage_limits)
        except CandidateLoadError as exc:
            return error_feedback("load", exc.message, exc.stderr_tail), wall, evals
        except HandshakeTimeout as exc:
            return error_feedback("load", str(exc)), wall, evals
        except Exception as exc:  # candidate crash during search
            stderr = getattr(exc, "stderr_tail", "")
            return (error_feedback("eval", str(exc), stderr, task_id=training.id),
                    wall, evals)
        wall += result.stats.wall_time
        evals += counting.evaluations
        if not result.solved:
            return (coverage_feedback(training.id, result.stats.expansions),
                    wall, evals)
    return None, wall, evals


def _binding(tasks, task_id):
    for training in tasks:
        if training.id == task_id:
            return training
    raise KeyError(task_id)


def _persist(config: RepairConfig, transcript: RepairTranscript,
             candidate: CandidateSource | None) -> None:
    if config.out_dir is None:
        return
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    transcript.save_jsonl(out / "transcript.jsonl")
    if candidate is not None:
        (out / "final_candidate.py").write_text(candidate.code, encoding="utf-8")
