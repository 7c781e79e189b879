"""Visibility and range-bearing localisation noise."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .world_model import AgentSpec, AgentState, WorldState, fov_region, is_soo_label

D_MIN = 0.1


@dataclass(frozen=True)
class Observation:
    label: str
    z: np.ndarray
    source_agent: int
    truth_id: int  # evaluation only, trackers must not read it


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.remainder(a, 2.0 * math.pi)
    return math.pi if w == -math.pi else w


def bearing_distance(agent: AgentState, point) -> tuple[float, float]:
    dx = float(point[0]) - agent.px
    dy = float(point[1]) - agent.py
    return math.hypot(dx, dy), wrap_angle(math.atan2(dy, dx) - agent.psi)


def rotation(rho: float) -> np.ndarray:
    c, s = math.cos(rho), math.sin(rho)
    return np.array([[c, -s], [s, c]])


def measurement_covariance(d: float, rho: float, alpha: float, d_min: float = D_MIN) -> np.ndarray:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    dd = max(d, d_min)
    G = rotation(rho)
    R = alpha * G @ np.diag([0.1 * dd, 0.1 * math.pi * dd]) @ G.T
    return 0.5 * (R + R.T)


def occluded(point, occlusions, skip: int | None = None) -> bool:
    x, y = float(point[0]), float(point[1])
    return any(w.contains(x, y) for n, w in enumerate(occlusions) if n != skip)


def visible_set(world: WorldState, specs: Sequence[AgentSpec]) -> np.ndarray:
    """Boolean [agents x targets] matrix; column OR gives the team-visible set."""
    out = np.zeros((len(world.agents), len(world.targets)), dtype=bool)
    for i, (agent, spec) in enumerate(zip(world.agents, specs)):
        fov = fov_region(agent, spec)
        for t, truth in enumerate(world.targets):
            out[i, t] = fov.contains(truth.px, truth.py) and not occluded(truth.position, world.occlusions)
    return out


def soo_visible(world: WorldState, specs: Sequence[AgentSpec]) -> np.ndarray:
    """[agents x occluders]: an occluder is seen when its centre is in the FoV and not behind another one."""
    out = np.zeros((len(world.agents), len(world.occlusions)), dtype=bool)
    for i, (agent, spec) in enumerate(zip(world.agents, specs)):
        fov = fov_region(agent, spec)
        for n, w in enumerate(world.occlusions):
            out[i, n] = fov.contains(w.cx, w.cy) and not occluded((w.cx, w.cy), world.occlusions, skip=n)
    return out


def _noisy(agent: AgentState, spec: AgentSpec, point: np.ndarray, rng, noise_scale: float) -> np.ndarray:
    if noise_scale == 0.0:
        return point.copy()
    d, rho = bearing_distance(agent, point)
    R = noise_scale * measurement_covariance(d, rho, spec.alpha)
    return point + rng.multivariate_normal(np.zeros(2), R)


def generate_observations(
    world: WorldState,
    specs: Sequence[AgentSpec],
    rng,
    noise_scale: float = 1.0,
    include_soo: bool = True,
) -> list[Observation]:
    """One observation per visible (target, agent) pair, plus occluder sightings.

    ``rng`` is either a single Generator or a sequence with one Generator per agent.
    Occluder observations carry ``truth_id = -(n + 1)`` for occluder index n.
    """
    rngs = rng if isinstance(rng, (list, tuple)) else [rng] * len(world.agents)
    vis = visible_set(world, specs)
    obs: list[Observation] = []
    for i, (agent, spec) in enumerate(zip(world.agents, specs)):
        for t, truth in enumerate(world.targets):
            if vis[i, t]:
                z = _noisy(agent, spec, truth.position, rngs[i], noise_scale)
                obs.append(Observation(truth.label, z, i, truth.id))
    if include_soo and world.occlusions:
        svis = soo_visible(world, specs)
        for i, (agent, spec) in enumerate(zip(world.agents, specs)):
            for n, w in enumerate(world.occlusions):
                if svis[i, n]:
                    z = _noisy(agent, spec, np.array([w.cx, w.cy]), rngs[i], noise_scale)
                    obs.append(Observation(w.label, z, i, -(n + 1)))
    return obs


def split_by_class(observations: Sequence[Observation]):
    ooi = [o for o in observations if not is_soo_label(o.label)]
    soo = [o for o in observations if is_soo_label(o.label)]
    return ooi, soo
