"""Nominal-belief receding-horizon cost.

Two routes compute the same number: ``evaluate_objective`` walks the horizon with the
information-form update one pair at a time, and ``NominalObjective`` evaluates a whole
batch of candidate joint plans in one compiled kernel for the optimiser.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from ..sensing import D_MIN, bearing_distance, measurement_covariance
from ..tracking import FilterState, info_update_trace, position_selector
from ..world_model import (
    AgentSpec,
    AgentState,
    Region,
    clip_speed,
    fov_region,
    ncv_process_noise,
    ncv_transition,
    step_agent,
)

OCCLUSION_MODES = ("apriori", "dynamic", "none")


@dataclass(frozen=True)
class ObjectiveParams:
    H: int = 5
    gamma: float = 1.0
    dt: float = 0.2
    q: float = 0.05
    occlusion_mode: str = "apriori"

    def __post_init__(self):
        if self.H < 1 or not 0 < self.gamma <= 1 or self.dt <= 0:
            raise ValueError(f"bad objective params {self}")
        if self.occlusion_mode not in OCCLUSION_MODES:
            raise ValueError(f"unknown occlusion mode {self.occlusion_mode!r}")


def nominal_prediction(belief: FilterState, H: int, dt: float) -> np.ndarray:
    """Noise-free mean positions, shape (tracks, H, 2), for steps 1..H."""
    if H < 1:
        raise ValueError("H must be >= 1")
    F = ncv_transition(dt)
    out = np.zeros((len(belief.ooi_tracks), H, 2))
    for n, tr in enumerate(belief.ooi_tracks):
        x = tr.xi.copy()
        for h in range(H):
            x = F @ x
            out[n, h] = x[:2]
    return out


def _discs(occlusion_set) -> np.ndarray:
    if occlusion_set is None:
        return np.zeros((0, 3))
    arr = np.asarray(occlusion_set, dtype=float)
    if arr.size == 0:
        return np.zeros((0, 3))
    return arr.reshape(-1, 3)


def evaluate_objective(
    belief: FilterState,
    plans: Sequence,
    agents: Sequence[AgentState],
    specs: Sequence[AgentSpec],
    occlusion_set,
    params: ObjectiveParams,
) -> float:
    """Discounted sum of posterior covariance traces along the nominal belief."""
    plans = [np.asarray(p, dtype=float).reshape(-1, 2) for p in plans]
    if len(plans) != len(agents) or any(len(p) != params.H for p in plans):
        raise ValueError(f"need one plan of length {params.H} per agent")
    discs = _discs(occlusion_set) if params.occlusion_mode != "none" else np.zeros((0, 3))
    F = ncv_transition(params.dt)
    Q = ncv_process_noise(params.q, params.dt)
    tracks = [(tr.xi.copy(), tr.P.copy()) for tr in belief.ooi_tracks]
    states = list(agents)
    cost = 0.0
    for h in range(params.H):
        states = [step_agent(s, p[h], params.dt, sp.v_max) for s, p, sp in zip(states, plans, specs)]
        fovs: list[Region] = [fov_region(s, sp) for s, sp in zip(states, specs)]
        step_cost = 0.0
        for n, (xi, P) in enumerate(tracks):
            xi = F @ xi
            P = F @ P @ F.T + Q
            x, y = xi[0], xi[1]
            hidden = any((x - cx) ** 2 + (y - cy) ** 2 <= r * r for cx, cy, r in discs)
            observers = []
            if not hidden:
                for s, sp, fov in zip(states, specs, fovs):
                    if fov.contains(x, y):
                        d, rho = bearing_distance(s, (x, y))
                        observers.append((position_selector(4), measurement_covariance(d, rho, sp.alpha)))
            P, tr = info_update_trace(P, observers)
            tracks[n] = (xi, P)
            step_cost += tr
        cost += params.gamma**h * step_cost
    return cost


@numba.njit(cache=True)
def _batch_cost(actions, pos0, psi0, vmax, half, alpha, means, covs, discs, dt, q, gamma, d_min):
    # actions: (B, N, H, 2)
    B, N, H = actions.shape[0], actions.shape[1], actions.shape[2]
    T = means.shape[0]
    D = discs.shape[0]
    q3, q2, q1 = q * dt**3 / 3.0, q * dt**2 / 2.0, q * dt
    out = np.zeros(B)

    # target nominal path and occlusion flags are plan independent
    tx = np.zeros((H, T))
    ty = np.zeros((H, T))
    hid = np.zeros((H, T), dtype=np.bool_)
    for t in range(T):
        x, y = means[t, 0], means[t, 1]
        for h in range(H):
            x += means[t, 2] * dt
            y += means[t, 3] * dt
            tx[h, t] = x
            ty[h, t] = y
            for w in range(D):
                if (x - discs[w, 0]) ** 2 + (y - discs[w, 1]) ** 2 <= discs[w, 2] ** 2:
                    hid[h, t] = True

    P = np.empty((T, 4, 4))
    Pn = np.empty((4, 4))
    px = np.empty(N)
    py = np.empty(N)
    psi = np.empty(N)
    for b in range(B):
        P[:] = covs
        for i in range(N):
            px[i] = pos0[i, 0]
            py[i] = pos0[i, 1]
            psi[i] = psi0[i]
        cost = 0.0
        disc = 1.0
        for h in range(H):
            for i in range(N):
                ax = actions[b, i, h, 0]
                ay = actions[b, i, h, 1]
                sp = math.sqrt(ax * ax + ay * ay)
                if sp > vmax[i]:
                    ax *= vmax[i] / sp
                    ay *= vmax[i] / sp
                px[i] += ax * dt
                py[i] += ay * dt
                if ax != 0.0 or ay != 0.0:
                    psi[i] = math.atan2(ay, ax)
            step = 0.0
            for t in range(T):
                # predict: F P F^T + Q with F = [[I, dt I], [0, I]]
                for r in range(4):
                    for c in range(4):
                        Pn[r, c] = P[t, r, c]
                for r in range(2):
                    for c in range(4):
                        Pn[r, c] += dt * P[t, r + 2, c]
                for r in range(4):
                    for c in range(2):
                        Pn[r, c] += dt * Pn[r, c + 2]
                Pn[0, 0] += q3
                Pn[1, 1] += q3
                Pn[0, 2] += q2
                Pn[2, 0] += q2
                Pn[1, 3] += q2
                Pn[3, 1] += q2
                Pn[2, 2] += q1
                Pn[3, 3] += q1

                j00 = 0.0
                j01 = 0.0
                j11 = 0.0
                if not hid[h, t]:
                    x = tx[h, t]
                    y = ty[h, t]
                    for i in range(N):
                        if px[i] - half[i, 0] <= x < px[i] + half[i, 0] and py[i] - half[i, 1] <= y < py[i] + half[i, 1]:
                            dx = x - px[i]
                            dy = y - py[i]
                            d = max(math.sqrt(dx * dx + dy * dy), d_min)
                            rho = math.atan2(dy, dx) - psi[i]
                            c = math.cos(rho)
                            s = math.sin(rho)
                            u = 1.0 / (alpha[i] * 0.1 * d)
                            v = 1.0 / (alpha[i] * 0.1 * math.pi * d)
                            j00 += c * c * u + s * s * v
                            j11 += s * s * u + c * c * v
                            j01 += c * s * (u - v)
                if j00 != 0.0 or j11 != 0.0:
                    # (P^-1 + H^T J H)^-1 = P - P H^T (I + J H P H^T)^-1 J H P
                    a00, a01, a11 = Pn[0, 0], Pn[0, 1], Pn[1, 1]
                    m00 = 1.0 + j00 * a00 + j01 * a01
                    m01 = j00 * a01 + j01 * a11
                    m10 = j01 * a00 + j11 * a01
                    m11 = 1.0 + j01 * a01 + j11 * a11
                    det = m00 * m11 - m01 * m10
                    i00, i01, i10, i11 = m11 / det, -m01 / det, -m10 / det, m00 / det
                    # G = M^-1 J
                    g00 = i00 * j00 + i01 * j01
                    g01 = i00 * j01 + i01 * j11
                    g10 = i10 * j00 + i11 * j01
                    g11 = i10 * j01 + i11 * j11
                    for r in range(4):
                        k0 = Pn[r, 0] * g00 + Pn[r, 1] * g10
                        k1 = Pn[r, 0] * g01 + Pn[r, 1] * g11
                        for c in range(r, 4):
                            val = Pn[r, c] - (k0 * Pn[c, 0] + k1 * Pn[c, 1])
                            P[t, r, c] = val
                            P[t, c, r] = val
                else:
                    for r in range(4):
                        for c in range(4):
                            P[t, r, c] = Pn[r, c]
                step += P[t, 0, 0] + P[t, 1, 1] + P[t, 2, 2] + P[t, 3, 3]
            cost += disc * step
            disc *= gamma
        out[b] = cost
    return out


class NominalObjective:
    """Batched cost of joint plans for a fixed belief, team state and occluder set."""

    def __init__(self, belief: FilterState, agents: Sequence[AgentState], specs: Sequence[AgentSpec], occlusion_set, params: ObjectiveParams):
        self.params = params
        self.n_agents = len(agents)
        self.pos0 = np.array([[a.px, a.py] for a in agents], dtype=float)
        self.psi0 = np.array([a.psi for a in agents], dtype=float)
        self.vmax = np.array([s.v_max for s in specs], dtype=float)
        self.half = np.array([[s.fov_half_x, s.fov_half_y] for s in specs], dtype=float)
        self.alpha = np.array([s.alpha for s in specs], dtype=float)
        T = len(belief.ooi_tracks)
        self.means = np.array([t.xi for t in belief.ooi_tracks], dtype=float).reshape(T, 4)
        self.covs = np.array([t.P for t in belief.ooi_tracks], dtype=float).reshape(T, 4, 4)
        self.discs = _discs(occlusion_set) if params.occlusion_mode != "none" else np.zeros((0, 3))
        self.n_evals = 0

    def batch(self, actions: np.ndarray) -> np.ndarray:
        a = np.ascontiguousarray(actions, dtype=float)
        if a.ndim != 4 or a.shape[1] != self.n_agents or a.shape[2] != self.params.H:
            raise ValueError(f"expected (B, {self.n_agents}, {self.params.H}, 2) actions, got {a.shape}")
        self.n_evals += a.shape[0]
        p = self.params
        return _batch_cost(a, self.pos0, self.psi0, self.vmax, self.half, self.alpha, self.means, self.covs,
                           self.discs, p.dt, p.q, p.gamma, D_MIN)

    def __call__(self, plans) -> float:
        a = np.asarray([np.asarray(p, dtype=float).reshape(-1, 2) for p in plans])
        if a.shape[1] != self.params.H:
            raise ValueError("plan length does not match horizon")
        return float(self.batch(a[None])[0])


def clip_plan(actions, v_max: float) -> np.ndarray:
    a = np.asarray(actions, dtype=float).reshape(-1, 2)
    return np.array([clip_speed(x, v_max) for x in a])
