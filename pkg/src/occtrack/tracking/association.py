"""Joint probabilistic data association over gated hypotheses."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .kalman import TrackEstimate, kf_update, position_selector, symmetrize

DEFAULT_GATE = 9.21


@dataclass
class AssociationResult:
    beta: np.ndarray  # [tracks x observations]
    beta0: np.ndarray  # [tracks] miss weight

    def best_observation(self, t: int) -> int | None:
        if self.beta.shape[1] == 0 or self.beta0[t] >= self.beta[t].max():
            return None
        return int(np.argmax(self.beta[t]))


def likelihood_table(tracks: Sequence[TrackEstimate], zs, Rs, gate_chi2: float):
    """Gaussian innovation likelihoods, zero outside the gate."""
    g = np.zeros((len(tracks), len(zs)))
    for t, tr in enumerate(tracks):
        H = position_selector(tr.dim)
        HPH = H @ tr.P @ H.T
        zhat = H @ tr.xi
        for j, (z, R) in enumerate(zip(zs, Rs)):
            S = HPH + R
            nu = np.asarray(z) - zhat
            d2 = float(nu @ np.linalg.solve(S, nu))
            if d2 <= gate_chi2:
                g[t, j] = np.exp(-0.5 * d2) / (2.0 * np.pi * np.sqrt(np.linalg.det(S)))
    return g


def _factor(value: float):
    """Split a factor into (finite part, zero count) so zero-rate limits stay ordered."""
    return (1.0, 1) if value == 0.0 else (value, 0)


def event_weights_from_table(g: np.ndarray, p_d: float, clutter_density: float) -> AssociationResult:
    """Enumerate joint events measurement-by-measurement.

    A factor of exactly zero (P_D = 1 miss, zero clutter) is treated as the limit of a
    vanishing rate: only events with the fewest such factors keep mass.
    """
    n_t, n_m = g.shape
    beta = np.zeros((n_t, n_m))
    beta0 = np.zeros(n_t)
    if n_t == 0:
        return AssociationResult(beta, beta0)
    gated = [j for j in range(n_m) if g[:, j].any()]
    miss_val, miss_zero = _factor(1.0 - p_d)
    fa_val, fa_zero = _factor(clutter_density)

    events: list[tuple[float, int, tuple[int, ...]]] = []
    assign = [-1] * n_m  # measurement -> track, -1 clutter

    def recurse(pos: int, used: int, w: float, zeros: int):
        if pos == len(gated):
            n_missed = n_t - bin(used).count("1")
            events.append((w * miss_val**n_missed, zeros + miss_zero * n_missed, tuple(assign)))
            return
        j = gated[pos]
        assign[j] = -1
        recurse(pos + 1, used, w * fa_val, zeros + fa_zero)
        for t in range(n_t):
            if g[t, j] > 0.0 and not used >> t & 1:
                assign[j] = t
                recurse(pos + 1, used | 1 << t, w * p_d * g[t, j], zeros)
        assign[j] = -1

    recurse(0, 0, 1.0, 0)
    min_zero = min(z for _, z, _ in events)
    total = 0.0
    for w, z, a in events:
        if z != min_zero:
            continue
        total += w
        hit = np.zeros(n_t, dtype=bool)
        for j, t in enumerate(a):
            if t >= 0:
                beta[t, j] += w
                hit[t] = True
        beta0[~hit] += w
    if total <= 0.0:
        beta[:] = 0.0
        beta0[:] = 1.0
    else:
        beta /= total
        beta0 /= total
    return AssociationResult(beta, beta0)


def associate(
    tracks: Sequence[TrackEstimate],
    zs,
    Rs,
    gate_chi2: float = DEFAULT_GATE,
    p_d: float = 1.0,
    clutter_density: float = 0.0,
) -> AssociationResult:
    """JPDA weights for observations of one agent and one semantic class."""
    return event_weights_from_table(likelihood_table(tracks, zs, Rs, gate_chi2), p_d, clutter_density)


def jpda_update(track: TrackEstimate, t: int, result: AssociationResult, zs, Rs) -> TrackEstimate:
    """Moment-matched mixture of per-hypothesis Kalman updates (exact KF for hard weights)."""
    b0 = result.beta0[t]
    weights = [(b0, track)]
    for j in range(result.beta.shape[1]):
        b = result.beta[t, j]
        if b > 0.0:
            weights.append((b, kf_update(track, zs[j], Rs[j])))
    if len(weights) == 1:
        return track
    if len(weights) == 2 and weights[0][0] == 0.0:
        return weights[1][1]
    xi = sum(w * tr.xi for w, tr in weights)
    P = np.zeros_like(track.P)
    for w, tr in weights:
        dx = tr.xi - xi
        P += w * (tr.P + np.outer(dx, dx))
    return TrackEstimate(track.id, track.label, xi, symmetrize(P))
