"""Cooperative-behaviour mining over recorded visibility and FoV histories.

Ownership sequences are lists indexed by step; each entry is a tuple of frozensets
(one per agent) or ``None`` where the look-ahead window runs past the trace end.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np

Ownership = tuple  # tuple[frozenset[int], ...]

M0 = "M0"
GOAL = "M*_L"
MISS1 = "Miss1"
MISS_GT1 = "MissGt1"
OTHER = "other"
CATEGORIES = (M0, GOAL, MISS1, MISS_GT1, OTHER)


class PreconditionError(ValueError):
    """The analysed target is not actually occluded over the requested interval."""


@dataclass(frozen=True)
class OwnershipChange:
    giver: int
    taker: int
    target: int
    k0: int
    L: int


@dataclass(frozen=True)
class OcclusionAware:
    k0: int
    target: int
    L: int
    h: int


@dataclass(frozen=True)
class OcclusionDetection:
    occluder: int
    agent: int
    k: int


def compute_m_ownership(visibility, m: int) -> list[Ownership | None]:
    """``visibility`` is (steps, agents, targets); window covers k..k+m inclusive."""
    if m < 1:
        raise ValueError("m must be >= 1")
    vis = np.asarray(visibility, dtype=bool)
    K = vis.shape[0]
    if K < m:
        raise ValueError("trace shorter than the ownership window")
    out: list[Ownership | None] = []
    for k in range(K):
        if k + m >= K:
            out.append(None)
            continue
        held = vis[k : k + m + 1].all(axis=0)
        out.append(tuple(frozenset(np.flatnonzero(row).tolist()) for row in held))
    return out


def _at(ownership: Sequence[Ownership | None], k: int) -> Ownership:
    if not 0 <= k < len(ownership) or ownership[k] is None:
        raise IndexError(f"ownership undefined at step {k}")
    return ownership[k]


def detect_ownership_change(ownership, i: int, j: int, t: int, k0: int, L: int) -> bool:
    a, b = _at(ownership, k0), _at(ownership, k0 + L)
    return t in a[i] and t not in a[j] and t in b[j] and t not in b[i]


def ownership_changes(ownership, k0: int, L: int) -> list[OwnershipChange]:
    a = _at(ownership, k0)
    targets = sorted(set().union(*a, *_at(ownership, k0 + L)))
    n = len(a)
    return [
        OwnershipChange(i, j, t, k0, L)
        for t in targets
        for i in range(n)
        for j in range(n)
        if i != j and detect_ownership_change(ownership, i, j, t, k0, L)
    ]


def _same(state: Ownership, pattern: Sequence[Iterable[int]]) -> bool:
    return len(state) == len(pattern) and all(s == frozenset(p) for s, p in zip(state, pattern))


def classify_ownership_profile(state: Ownership, m0, goal, n_targets: int) -> str:
    """Goal matches under any agent permutation; M0 must match agent-for-agent."""
    if goal is not None and any(_same(state, perm) for perm in permutations(goal)):
        return GOAL
    if m0 is not None and _same(state, m0):
        return M0
    owned = set().union(*state) if state else set()
    missing = n_targets - len(owned)
    if missing == 1:
        return MISS1
    if missing > 1:
        return MISS_GT1
    return OTHER


def detect_occlusion_aware(
    ownership,
    fov_contains,
    occluded,
    t: int,
    k0: int,
    L: int,
    h: int,
) -> bool:
    """Three-clause occlusion-awareness check.

    ``fov_contains`` is (steps, agents, targets) true-position-in-FoV, ``occluded`` is
    (steps, targets) ground-truth occlusion of each target.
    """
    lo, hi = k0 + h, k0 + L - h
    occ = np.asarray(occluded, dtype=bool)
    if lo > hi or lo < 0 or hi >= occ.shape[0]:
        raise PreconditionError(f"interval [{lo}, {hi}] outside trace")
    if not occ[lo : hi + 1, t].all():
        raise PreconditionError(f"target {t} is not occluded throughout [{lo}, {hi}]")
    start, end = _at(ownership, k0), _at(ownership, k0 + L)
    if not any(t in s for s in start):
        return False
    fov = np.asarray(fov_contains, dtype=bool)
    for i in range(fov.shape[1]):
        waiting = all(
            ownership[k] is not None and not ownership[k][i] and fov[k, i, t] for k in range(lo, hi + 1)
        )
        if waiting:
            return False
    return any(t in s for s in end)


def occlusion_share_stats(results: Sequence[tuple[bool, bool]]):
    """(P[OA | e], P[OA]); the conditional is ``None`` when no trial saw the event."""
    if not results:
        raise ValueError("no trials")
    n_e = sum(1 for e, _ in results if e)
    n_oa = sum(1 for _, oa in results if oa)
    n_both = sum(1 for e, oa in results if e and oa)
    p_cond = n_both / n_e if n_e else None
    return p_cond, n_oa / len(results)


def occlusion_detections(occluder_in_fov) -> list[OcclusionDetection]:
    """First step each agent had each occluder in its FoV; input is (steps, agents, occluders)."""
    arr = np.asarray(occluder_in_fov, dtype=bool)
    events = []
    if arr.ndim != 3:
        return events
    for i in range(arr.shape[1]):
        for w in range(arr.shape[2]):
            hits = np.flatnonzero(arr[:, i, w])
            if hits.size:
                events.append(OcclusionDetection(w, i, int(hits[0])))
    return events
