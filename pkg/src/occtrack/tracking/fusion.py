"""Filter state containers, consensus-on-information fusion and the dynamic occlusion map."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .association import DEFAULT_GATE
from .kalman import FilterError, TrackEstimate, kf_update, symmetrize


@dataclass(frozen=True)
class DynamicOcclusionMap:
    soo_tracks: tuple[TrackEstimate, ...] = ()
    fixed_radius: float = 1.0
    max_tracks: int = 64
    next_id: int = 0

    def discs(self) -> np.ndarray:
        """(n, 3) array of (cx, cy, radius) used by the planners."""
        if not self.soo_tracks:
            return np.zeros((0, 3))
        return np.array([[t.xi[0], t.xi[1], self.fixed_radius] for t in self.soo_tracks])


@dataclass(frozen=True)
class FilterState:
    ooi_tracks: tuple[TrackEstimate, ...]
    occlusion_map: DynamicOcclusionMap = field(default_factory=DynamicOcclusionMap)

    def __post_init__(self):
        ids = [t.id for t in self.ooi_tracks]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate OOI track ids")

    def digest(self) -> bytes:
        parts = [t.xi.tobytes() + t.P.tobytes() for t in self.ooi_tracks]
        parts += [t.xi.tobytes() + t.P.tobytes() for t in self.occlusion_map.soo_tracks]
        return b"".join(parts)


def fuse_information(tracks: Sequence[TrackEstimate], weights: Sequence[float]) -> TrackEstimate:
    omega = np.zeros_like(tracks[0].P)
    q = np.zeros_like(tracks[0].xi)
    try:
        for w, tr in zip(weights, tracks):
            Y = np.linalg.inv(tr.P)
            omega += w * Y
            q += w * (Y @ tr.xi)
        P = np.linalg.inv(omega)
    except np.linalg.LinAlgError as exc:
        raise FilterError(f"information fusion failed for track {tracks[0].id}") from exc
    P = symmetrize(P)
    return replace(tracks[0], xi=P @ q, P=P)


def _check_weights(weights: Sequence[float], n: int) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.shape != (n,) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("fusion weights must be non-negative, one per agent, summing to 1")
    return w


def align_soo_tracks(maps: Sequence[DynamicOcclusionMap], gate_chi2: float = DEFAULT_GATE):
    """Give every agent the same SOO id set.

    Entries with different ids that gate against each other are merged under the
    smaller id; ids missing at an agent are filled with the first sharer's estimate.
    """
    by_id: dict[int, TrackEstimate] = {}
    rename: list[dict[int, int]] = [dict() for _ in maps]
    for a, m in enumerate(maps):
        for tr in m.soo_tracks:
            if tr.id in by_id:
                continue
            target = None
            for known in by_id.values():
                d = tr.xi - known.xi
                S = tr.P + known.P
                if float(d @ np.linalg.solve(S, d)) <= gate_chi2:
                    target = known.id
                    break
            if target is None:
                by_id[tr.id] = tr
            else:
                rename[a][tr.id] = target
    ids = sorted(by_id)
    aligned = []
    for a, m in enumerate(maps):
        own: dict[int, TrackEstimate] = {}
        for tr in m.soo_tracks:
            tid = rename[a].get(tr.id, tr.id)
            if tid not in own:
                own[tid] = replace(tr, id=tid)
        aligned.append([own.get(i, by_id[i]) for i in ids])
    return ids, aligned


def ci_fuse(local_states: Sequence[FilterState], weights: Sequence[float]) -> FilterState:
    """One consensus-on-information combination of agents' estimates."""
    w = _check_weights(weights, len(local_states))
    ref_ids = [t.id for t in local_states[0].ooi_tracks]
    for s in local_states[1:]:
        if [t.id for t in s.ooi_tracks] != ref_ids:
            raise ValueError("OOI track ids differ between agents")
    fused = tuple(
        fuse_information([s.ooi_tracks[n] for s in local_states], w) for n in range(len(ref_ids))
    )
    maps = [s.occlusion_map for s in local_states]
    ids, aligned = align_soo_tracks(maps)
    soo = tuple(fuse_information([al[n] for al in aligned], w) for n in range(len(ids)))
    base = maps[0]
    new_map = replace(base, soo_tracks=soo, next_id=max(m.next_id for m in maps))
    return FilterState(fused, new_map)


def consensus(local_states: Sequence[FilterState], weight_matrix: np.ndarray, rounds: int = 1) -> list[FilterState]:
    """Synchronous CI rounds; row i of ``weight_matrix`` holds agent i's neighbour weights."""
    states = list(local_states)
    W = np.asarray(weight_matrix, dtype=float)
    for _ in range(rounds):
        states = [ci_fuse(states, W[i]) for i in range(len(states))]
    return states


def update_occlusion_map(
    occ_map: DynamicOcclusionMap,
    zs,
    Rs,
    init_var: float = 1.0,
    gate_chi2: float = DEFAULT_GATE,
    id_offset: int = 0,
) -> DynamicOcclusionMap:
    """Static-model update of SOO estimates with one agent's occluder sightings.

    Each existing entry takes at most one gated sighting (closest in Mahalanobis
    distance first); leftover sightings spawn new entries. ``id_offset`` keeps ids
    minted by different agents disjoint.
    """
    tracks = list(occ_map.soo_tracks)
    pairs = []
    for j, (z, R) in enumerate(zip(zs, Rs)):
        for n, tr in enumerate(tracks):
            nu = np.asarray(z) - tr.xi
            d2 = float(nu @ np.linalg.solve(tr.P + R, nu))
            if d2 <= gate_chi2:
                pairs.append((d2, j, n))
    used_obs, used_tr = set(), set()
    for d2, j, n in sorted(pairs):
        if j in used_obs or n in used_tr:
            continue
        tracks[n] = kf_update(tracks[n], zs[j], Rs[j])
        used_obs.add(j)
        used_tr.add(n)
    next_id = occ_map.next_id
    for j, z in enumerate(zs):
        if j in used_obs or len(tracks) >= occ_map.max_tracks:
            continue
        tracks.append(TrackEstimate(id_offset + next_id, "tree", np.array(z, dtype=float), init_var * np.eye(2)))
        next_id += 1
    return replace(occ_map, soo_tracks=tuple(tracks), next_id=next_id)
