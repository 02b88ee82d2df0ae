"""Test corpus: explicit graphs, tiny PDDL tasks, scripted candidates.

Every fixture is listed in ``manifest.json`` with its documented expected
verdicts; the test suite reproduces each verdict with the corresponding
oracle.  All PDDL fixtures stay under 10,000 reachable states so the exact
oracles always apply.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from ..errors import UnknownFixture
from ..heuristics import TableHeuristic, table_heuristic
from ..pddl import compile_negative_preconditions, ground, parse_domain, parse_task
from ..statespace import ExplicitGraph


def _root():
    return resources.files("downhill").joinpath("fixtures")


def manifest() -> dict:
    return json.loads(_root().joinpath("manifest.json").read_text("utf-8"))


def fixture_ids(kind: str | None = None) -> list[str]:
    entries = manifest()
    return [fid for fid, entry in entries.items()
            if kind is None or entry["kind"] == kind]


def read_fixture_file(relative: str) -> str:
    return _root().joinpath(relative).read_text("utf-8")


def fixture_path(relative: str) -> str:
    """Filesystem path of a fixture file (for CLI and bench tests)."""
    return str(_root().joinpath(relative))


@dataclass
class LoadedFixture:
    id: str
    kind: str
    files: dict[str, str]
    expected: dict
    provenance: str
    graph: ExplicitGraph | None = None
    heuristic: TableHeuristic | None = None
    domain_text: str | None = None
    task_text: str | None = None
    task: object | None = None  # GroundTask, negatives compiled away
    objects: dict[str, str] = field(default_factory=dict)
    domain_name: str = ""
    code: str | None = None


def load_fixture(fixture_id: str) -> LoadedFixture:
    entries = manifest()
    if fixture_id not in entries:
        raise UnknownFixture(fixture_id)
    entry = entries[fixture_id]
    loaded = LoadedFixture(
        id=fixture_id, kind=entry["kind"], files=dict(entry["files"]),
        expected=dict(entry.get("expected", {})),
        provenance=entry.get("provenance", ""),
    )
    if loaded.kind == "graph":
        loaded.graph = ExplicitGraph.from_json(
            read_fixture_file(loaded.files["graph"]), name=fixture_id)
        loaded.heuristic = table_heuristic(loaded.graph)
    elif loaded.kind == "pddl":
        loaded.domain_text = read_fixture_file(loaded.files["domain"])
        loaded.task_text = read_fixture_file(loaded.files["task"])
        domain = parse_domain(loaded.domain_text)
        task_ast = parse_task(loaded.task_text, domain)
        compiled_domain, compiled_task = compile_negative_preconditions(domain, task_ast)
        loaded.task = ground(compiled_domain, compiled_task)
        loaded.objects = task_ast.object_map()
        loaded.domain_name = domain.name
    elif loaded.kind == "candidate-script":
        loaded.code = read_fixture_file(loaded.files["code"])
    else:
        raise UnknownFixture(f"{fixture_id} (unsupported kind {loaded.kind!r})")
    return loaded
