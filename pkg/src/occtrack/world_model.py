"""Ground-truth containers and kinematics for agents, targets and occluders."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

OOI_LABELS = frozenset({"human", "vehicle", "ooi"})
SOO_LABELS = frozenset({"tree", "soo"})


def is_soo_label(label: str) -> bool:
    return label in SOO_LABELS


@dataclass(frozen=True)
class AgentState:
    px: float
    py: float
    psi: float = 0.0
    vx: float = 0.0
    vy: float = 0.0

    @property
    def position(self) -> np.ndarray:
        return np.array([self.px, self.py])


@dataclass(frozen=True)
class AgentSpec:
    v_max: float
    fov_half_x: float
    fov_half_y: float
    alpha: float = 1.0

    def __post_init__(self):
        if not (self.v_max > 0 and self.fov_half_x > 0 and self.fov_half_y > 0 and self.alpha > 0):
            raise ValueError(f"invalid agent spec: {self}")


@dataclass(frozen=True)
class TargetTruth:
    id: int
    label: str
    px: float
    py: float
    vx: float = 0.0
    vy: float = 0.0

    @property
    def position(self) -> np.ndarray:
        return np.array([self.px, self.py])

    @property
    def state(self) -> np.ndarray:
        return np.array([self.px, self.py, self.vx, self.vy])


@dataclass(frozen=True)
class OcclusionObject:
    cx: float
    cy: float
    radius: float
    label: str = "tree"

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("occlusion radius must be positive")

    def contains(self, x: float, y: float) -> bool:
        return (x - self.cx) ** 2 + (y - self.cy) ** 2 <= self.radius**2


@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangle, closed on the min edges and open on the max edges."""

    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def __post_init__(self):
        if not (self.min_x < self.max_x and self.min_y < self.max_y):
            raise ValueError(f"degenerate region {self}")

    def contains(self, x: float, y: float) -> bool:
        return self.min_x <= x < self.max_x and self.min_y <= y < self.max_y

    @property
    def area(self) -> float:
        return (self.max_x - self.min_x) * (self.max_y - self.min_y)

    def as_list(self) -> list[float]:
        return [self.min_x, self.min_y, self.max_x, self.max_y]


def region_contains(region: Region, point) -> bool:
    return region.contains(float(point[0]), float(point[1]))


@dataclass(frozen=True)
class WorldState:
    k: int
    agents: tuple[AgentState, ...]
    targets: tuple[TargetTruth, ...]
    occlusions: tuple[OcclusionObject, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.agents) < 1:
            raise ValueError("world needs at least one agent")
        if self.k < 0:
            raise ValueError("time step must be non-negative")


def clip_speed(action, v_max: float) -> np.ndarray:
    a = np.asarray(action, dtype=float)
    speed = math.hypot(a[0], a[1])
    if speed > v_max:
        a = a * (v_max / speed)
    return a


def step_agent(state: AgentState, action, dt: float, v_max: float) -> AgentState:
    if dt <= 0:
        raise ValueError("dt must be positive")
    a = np.asarray(action, dtype=float)
    if a.shape != (2,) or not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite or malformed action {action!r}")
    v = clip_speed(a, v_max)
    psi = math.atan2(v[1], v[0]) if (v[0] != 0.0 or v[1] != 0.0) else state.psi
    return AgentState(
        px=state.px + v[0] * dt,
        py=state.py + v[1] * dt,
        psi=psi,
        vx=float(v[0]),
        vy=float(v[1]),
    )


def fov_region(state: AgentState, spec: AgentSpec) -> Region:
    # nadir footprint, yaw does not rotate it
    return Region(
        state.px - spec.fov_half_x,
        state.py - spec.fov_half_y,
        state.px + spec.fov_half_x,
        state.py + spec.fov_half_y,
    )


def ncv_transition(dt: float) -> np.ndarray:
    F = np.eye(4)
    F[0, 2] = F[1, 3] = dt
    return F


def ncv_process_noise(q: float, dt: float) -> np.ndarray:
    """White-noise-acceleration covariance for state order (px, py, vx, vy)."""
    Q = np.zeros((4, 4))
    a, b, c = dt**3 / 3.0, dt**2 / 2.0, dt
    for p, v in ((0, 2), (1, 3)):
        Q[p, p] = a
        Q[p, v] = Q[v, p] = b
        Q[v, v] = c
    return q * Q


def step_target_truth(t: TargetTruth, dt: float, q: float, rng: np.random.Generator | None = None) -> TargetTruth:
    if dt <= 0 or q < 0:
        raise ValueError("need dt > 0 and q >= 0")
    if is_soo_label(t.label):
        return t
    x = ncv_transition(dt) @ t.state
    if q > 0:
        if rng is None:
            raise ValueError("rng required when q > 0")
        x = x + rng.multivariate_normal(np.zeros(4), ncv_process_noise(q, dt))
    return replace(t, px=float(x[0]), py=float(x[1]), vx=float(x[2]), vy=float(x[3]))
