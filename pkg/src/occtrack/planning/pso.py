"""Global-best particle swarm minimiser with constriction coefficients."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass(frozen=True)
class PsoParams:
    swarm_size: int = 40
    iterations: int = 60
    w: float = 0.729
    c1: float = 1.49445
    c2: float = 1.49445
    seed: int = 0

    def __post_init__(self):
        if self.swarm_size < 2 or self.iterations < 1:
            raise ValueError("need swarm_size >= 2 and iterations >= 1")


def pso_minimize(
    objective: Callable[[np.ndarray], np.ndarray],
    bounds: tuple[np.ndarray, np.ndarray],
    params: PsoParams = PsoParams(),
    seeds: Sequence[np.ndarray] = (),
    rng: np.random.Generator | None = None,
    vectorized: bool = False,
) -> tuple[np.ndarray, float]:
    """Minimise ``objective`` over a box.

    With ``vectorized`` the objective maps an (n, dim) array to n costs, otherwise it is
    called once per row. The zero vector (clipped into the box) and every entry of
    ``seeds`` are injected as initial particles, so the result is never worse than them.
    """
    lo = np.asarray(bounds[0], dtype=float)
    hi = np.asarray(bounds[1], dtype=float)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo <= hi)):
        raise ValueError("bounds must be finite with lo <= hi")
    if rng is None:
        rng = np.random.default_rng(params.seed)
    f = objective if vectorized else (lambda X: np.array([objective(x) for x in X], dtype=float))
    dim = lo.size
    n = params.swarm_size

    x = rng.uniform(lo, hi, size=(n, dim))
    injected = [np.clip(np.zeros(dim), lo, hi)] + [np.clip(np.asarray(s, dtype=float).ravel(), lo, hi) for s in seeds]
    for k, s in enumerate(injected[:n]):
        x[k] = s
    span = hi - lo
    v = rng.uniform(-span, span, size=(n, dim)) * 0.1
    y = f(x)
    pbest_x, pbest_y = x.copy(), y.copy()
    g = int(np.argmin(pbest_y))
    gbest_x, gbest_y = pbest_x[g].copy(), float(pbest_y[g])

    for _ in range(params.iterations):
        r1 = rng.random((n, dim))
        r2 = rng.random((n, dim))
        v = params.w * v + params.c1 * r1 * (pbest_x - x) + params.c2 * r2 * (gbest_x - x)
        v = np.clip(v, -span, span)
        x = np.clip(x + v, lo, hi)
        y = f(x)
        better = y < pbest_y
        pbest_x[better] = x[better]
        pbest_y[better] = y[better]
        g = int(np.argmin(pbest_y))
        if pbest_y[g] < gbest_y:
            gbest_x, gbest_y = pbest_x[g].copy(), float(pbest_y[g])
    return gbest_x, gbest_y
