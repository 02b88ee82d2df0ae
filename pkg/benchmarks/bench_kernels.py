#!/usr/bin/env python3
"""Compare the numba and numpy kernel backends on the hot paths.

Times the applicability mask and the relaxed-reachability forward pass on
a synthetic task sized like a mid-size grounded instance, plus end-to-end
ff evaluation and GBFS on the largest shipped fixture.  Each backend runs
in-process by reloading the kernel module under the env flag.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import importlib
import os
import statistics
import sys
import time


def _load_backend(use_numba: bool):
    os.environ["DOWNHILL_NUMBA"] = "1" if use_numba else "0"
    for name in [m for m in sys.modules if m.startswith("downhill")]:
        del sys.modules[name]
    kernels = importlib.import_module("downhill._kernels")
    return kernels


def _synthetic_arrays(kernels, num_facts=4096, num_actions=2000, seed=3):
    import numpy as np

    rng = np.random.default_rng(seed)
    state = rng.random(num_facts) < 0.5
    state_words = kernels.pack_bools(state)
    pre_words = np.stack([kernels.pack_bools(rng.random(num_facts) < 0.002)
                          for _ in range(num_actions)])
    pre_lists = [sorted(rng.choice(num_facts, size=3, replace=False))
                 for _ in range(num_actions)]
    add_lists = [sorted(rng.choice(num_facts, size=2, replace=False))
                 for _ in range(num_actions)]

    def csr(lists):
        off = np.zeros(len(lists) + 1, dtype=np.int32)
        for i, lst in enumerate(lists):
            off[i + 1] = off[i] + len(lst)
        flat = np.zeros(int(off[-1]), dtype=np.int32)
        for i, lst in enumerate(lists):
            flat[off[i]:off[i + 1]] = lst
        return flat, off

    pre_flat, pre_off = csr(pre_lists)
    add_flat, add_off = csr(add_lists)
    goal_mask = np.zeros(num_facts, dtype=bool)
    goal_mask[rng.choice(num_facts, size=8, replace=False)] = True
    in_state = rng.random(num_facts) < 0.05
    return (pre_words, state_words), (in_state, goal_mask, pre_flat, pre_off,
                                      add_flat, add_off)


def _time(fn, repeat):
    samples = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return min(samples), statistics.median(samples)


def run(use_numba: bool, repeat: int) -> dict:
    kernels = _load_backend(use_numba)
    mask_args, ff_args = _synthetic_arrays(kernels)
    # warm-up (JIT compile on the numba path)
    kernels.applicable_mask(*mask_args)
    kernels.ff_forward(*ff_args)

    results = {"backend": kernels.backend()}
    results["applicable_mask"] = _time(lambda: kernels.applicable_mask(*mask_args),
                                       repeat)
    results["ff_forward"] = _time(lambda: kernels.ff_forward(*ff_args), repeat)

    from downhill import Limits, fixtures, gbfs
    from downhill.heuristics import ff

    task = fixtures.load_fixture("ferry-2").task
    heuristic = ff(task)
    initial = task.initial()
    heuristic.evaluate(initial)  # warm

    results["ff_evaluate_x100"] = _time(
        lambda: [heuristic.evaluate(initial) for _ in range(100)], repeat)
    results["gbfs_ferry2"] = _time(
        lambda: gbfs(task, ff(task), Limits(wall_time=60.0)), repeat)
    return results


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rows = [run(use_numba=True, repeat=args.repeat),
            run(use_numba=False, repeat=args.repeat)]
    names = [k for k in rows[0] if k != "backend"]
    width = max(len(n) for n in names) + 2
    header = f"{'kernel':<{width}}" + "".join(f"{r['backend']:>14}" for r in rows)
    print(header)
    print("-" * len(header))
    for name in names:
        line = f"{name:<{width}}"
        for row in rows:
            best, _ = row[name]
            line += f"{best * 1000:>11.3f} ms"
        print(line)
    if rows[0]["backend"] == rows[1]["backend"]:
        print("note: numba unavailable or disabled; both columns ran the numpy path")
    return 0


if __name__ == "__main__":
    sys.exit(main())
