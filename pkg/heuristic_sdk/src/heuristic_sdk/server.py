"""Child half of the candidate evaluation protocol.

Reads line-delimited JSON from stdin and writes replies to stdout:

    <- {"type":"init","domain_pddl":str,"task_pddl":str,"code":str}
    -> {"type":"ready"} | {"type":"load_error","message":str}
    <- {"type":"eval","id":int,"states":[[fact,...],...]}
    -> {"type":"values","id":int,"h":[number|"inf",...]}
    <- {"type":"shutdown"}

The candidate must define ``h(state, ctx)`` taking a set of ground atom
strings and a :class:`~heuristic_sdk.context.TaskContext`; it returns a
non-negative number or ``float("inf")``.  A candidate exception ends the
process with a nonzero exit code and the exception text on stderr.  No
sandboxing happens here; OS-level limits are the parent's job.
"""

from __future__ import annotations

import json
import math
import sys
import traceback

from .context import TaskContext

ENTRY_POINT = "h"


def _emit(stream, message: dict) -> None:
    stream.write(json.dumps(message) + "\n")
    stream.flush()


def _load(code: str, stderr) -> tuple:
    namespace: dict = {}
    try:
        exec(compile(code, "<candidate>", "exec"), namespace)
    except BaseException as exc:
        traceback.print_exc(file=stderr)
        return None, f"{type(exc).__name__}: {exc}"
    fn = namespace.get(ENTRY_POINT)
    if not callable(fn):
        return None, f"candidate does not define a function named {ENTRY_POINT!r}"
    return fn, None


def _wire_value(value) -> "float | str":
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"heuristic returned {value!r}, not a number")
    value = float(value)
    if math.isnan(value):
        raise ValueError("heuristic returned NaN")
    if value < 0:
        raise ValueError(f"heuristic returned the negative value {value}")
    if math.isinf(value):
        return "inf"
    return int(value) if value.is_integer() else value


def serve(stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr

    first = stdin.readline()
    if not first:
        print("no init message on stdin", file=stderr)
        return 1
    try:
        init = json.loads(first)
    except json.JSONDecodeError as exc:
        print(f"init message is not JSON: {exc}", file=stderr)
        return 1
    if init.get("type") != "init":
        print(f"expected init, got {init.get('type')!r}", file=stderr)
        return 1

    try:
        ctx = TaskContext.from_pddl(init.get("domain_pddl", ""),
                                    init.get("task_pddl", ""))
    except Exception as exc:
        _emit(stdout, {"type": "load_error",
                       "message": f"cannot parse task context: {exc}"})
        return 0

    fn, load_error = _load(init.get("code", ""), stderr)
    if fn is None:
        _emit(stdout, {"type": "load_error", "message": load_error})
        return 0
    _emit(stdout, {"type": "ready"})

    for line in stdin:
        if not line.strip():
            continue
        try:
            message = json.loads(line)
        except json.JSONDecodeError as exc:
            print(f"request is not JSON: {exc}", file=stderr)
            return 1
        kind = message.get("type")
        if kind == "shutdown":
            return 0
        if kind != "eval":
            print(f"unknown message type {kind!r}", file=stderr)
            return 1
        try:
            values = [_wire_value(fn(set(facts), ctx))
                      for facts in message.get("states", [])]
        except BaseException:
            traceback.print_exc(file=stderr)
            return 2
        _emit(stdout, {"type": "values", "id": message.get("id"), "h": values})
    # parent hung up without a shutdown message
    return 0
