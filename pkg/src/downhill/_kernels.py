"""Hot numeric kernels: bitset subset tests and relaxed-reachability layers.

Two interchangeable backends compute identical results:

* ``numba``: tight loops compiled with ``@njit`` (default when numba imports),
* ``numpy``: vectorized fallback, selected by setting ``DOWNHILL_NUMBA=0``.

States are packed little-endian into uint64 words; bit ``i`` of the universe
lives at ``words[i >> 6] >> (i & 63)``.
"""

from __future__ import annotations

import os
import sys

import numpy as np

assert sys.byteorder == "little", "bit packing assumes a little-endian host"


def _numba_requested() -> bool:
    flag = os.environ.get("DOWNHILL_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


# ---------------------------------------------------------------------------
# Packing helpers (cheap, always plain numpy)

def words_for(num_facts: int) -> int:
    return max(1, (num_facts + 63) // 64)


def pack_ids(ids, num_facts: int) -> np.ndarray:
    mask = np.zeros(num_facts, dtype=bool)
    idx = np.fromiter(ids, dtype=np.int64, count=-1) if not isinstance(ids, np.ndarray) else ids
    if len(idx):
        mask[idx] = True
    return pack_bools(mask)


def pack_bools(mask: np.ndarray) -> np.ndarray:
    num_words = words_for(mask.shape[0])
    packed = np.packbits(mask, bitorder="little")
    buf = np.zeros(num_words * 8, dtype=np.uint8)
    buf[: packed.shape[0]] = packed
    return buf.view(np.uint64)


def unpack_bools(words: np.ndarray, num_facts: int) -> np.ndarray:
    return np.unpackbits(words.view(np.uint8), bitorder="little")[:num_facts].astype(bool)


def ids_from_words(words: np.ndarray, num_facts: int) -> np.ndarray:
    return np.flatnonzero(unpack_bools(words, num_facts))


def is_subset(sub_words: np.ndarray, sup_words: np.ndarray) -> bool:
    return not np.any(sub_words & ~sup_words)


# ---------------------------------------------------------------------------
# Kernel: which actions have pre <= state

def _applicable_mask_numpy(pre_words: np.ndarray, state_words: np.ndarray) -> np.ndarray:
    return ~np.any(pre_words & ~state_words[None, :], axis=1)


def _applicable_mask_loop(pre_words, state_words):  # pragma: no cover - jitted
    num_actions, num_words = pre_words.shape
    out = np.empty(num_actions, np.bool_)
    for i in range(num_actions):
        ok = True
        for w in range(num_words):
            if pre_words[i, w] & ~state_words[w] != np.uint64(0):
                ok = False
                break
        out[i] = ok
    return out


# ---------------------------------------------------------------------------
# Kernel: delete-relaxed reachability layers with best supporters
#
# Round L makes applicable every still-unlayered action whose preconditions
# all have fact layers <= L; its add effects enter layer L+1.  The supporter
# of a fact is its first achiever; within a round the lowest action id wins.
# Returns (fact_layer, act_layer, supporter, goal_reached); -1 means
# unreached.

def _ff_forward_numpy(in_state, is_goal_fact, pre_flat, pre_off, add_flat, add_off):
    num_facts = in_state.shape[0]
    num_actions = pre_off.shape[0] - 1
    fact_layer = np.where(in_state, 0, -1).astype(np.int32)
    supporter = np.full(num_facts, -1, np.int32)
    act_layer = np.full(num_actions, -1, np.int32)
    pre_sizes = np.diff(pre_off)
    pre_act = np.repeat(np.arange(num_actions, dtype=np.int32), pre_sizes)
    add_sizes = np.diff(add_off)
    add_act = np.repeat(np.arange(num_actions, dtype=np.int32), add_sizes)
    reached = in_state.copy()
    goals_left = int(np.count_nonzero(is_goal_fact & ~reached))
    level = 0
    while goals_left > 0:
        sat = np.zeros(num_actions, np.int64)
        np.add.at(sat, pre_act, reached[pre_flat].astype(np.int64))
        newly = (act_layer < 0) & (sat == pre_sizes)
        if not newly.any():
            break
        act_layer[newly] = level
        picked = newly[add_act]
        cand_facts = add_flat[picked]
        cand_acts = add_act[picked]
        fresh = ~reached[cand_facts]
        cand_facts = cand_facts[fresh]
        cand_acts = cand_acts[fresh]
        if cand_facts.size:
            # cand_acts ascends with action id, so first occurrence = lowest id
            uniq, first = np.unique(cand_facts, return_index=True)
            fact_layer[uniq] = level + 1
            supporter[uniq] = cand_acts[first]
            reached[uniq] = True
            goals_left -= int(np.count_nonzero(is_goal_fact[uniq]))
        level += 1
    return fact_layer, act_layer, supporter, goals_left == 0


def _ff_forward_loop(in_state, is_goal_fact, pre_flat, pre_off, add_flat, add_off):  # pragma: no cover - jitted
    num_facts = in_state.shape[0]
    num_actions = pre_off.shape[0] - 1
    fact_layer = np.full(num_facts, -1, np.int32)
    supporter = np.full(num_facts, -1, np.int32)
    act_layer = np.full(num_actions, -1, np.int32)
    goals_left = 0
    for f in range(num_facts):
        if in_state[f]:
            fact_layer[f] = 0
    for f in range(num_facts):
        if is_goal_fact[f] and fact_layer[f] < 0:
            goals_left += 1
    level = 0
    while goals_left > 0:
        progress = False
        for a in range(num_actions):
            if act_layer[a] >= 0:
                continue
            ok = True
            for k in range(pre_off[a], pre_off[a + 1]):
                fl = fact_layer[pre_flat[k]]
                if fl < 0 or fl > level:
                    ok = False
                    break
            if not ok:
                continue
            act_layer[a] = level
            progress = True
            for k in range(add_off[a], add_off[a + 1]):
                f = add_flat[k]
                if fact_layer[f] < 0:
                    fact_layer[f] = level + 1
                    supporter[f] = a
                    if is_goal_fact[f]:
                        goals_left -= 1
        if not progress:
            break
        level += 1
    return fact_layer, act_layer, supporter, goals_left == 0


# ---------------------------------------------------------------------------
# Backend selection

BACKEND = "numpy"
applicable_mask = _applicable_mask_numpy
ff_forward = _ff_forward_numpy

if _numba_requested():
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a hard dependency
        pass
    else:
        BACKEND = "numba"
        applicable_mask = njit(cache=True)(_applicable_mask_loop)
        ff_forward = njit(cache=True)(_ff_forward_loop)


def backend() -> str:
    """Active kernel backend, either "numba" or "numpy"."""
    return BACKEND
