"""Sequential (SMA-NBO) and decentralised (Dec-POMDP-NBO) receding-horizon planners."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..tracking import FilterState
from ..world_model import AgentSpec, AgentState
from .objective import NominalObjective, ObjectiveParams, clip_plan
from .pso import PsoParams, pso_minimize


@dataclass(frozen=True)
class Plan:
    agent: int
    actions: np.ndarray  # (H, 2)

    @property
    def H(self) -> int:
        return len(self.actions)


@dataclass(frozen=True)
class Intention:
    agent: int
    actions: np.ndarray


def zero_intention(agent: int, H: int) -> Intention:
    return Intention(agent, np.zeros((H, 2)))


def shift_intention(plan: Plan) -> Intention:
    a = np.asarray(plan.actions, dtype=float)
    return Intention(plan.agent, np.vstack([a[1:], a[-1:]]))


@dataclass
class PlanOutcome:
    plan: Plan
    cost_before: float  # joint cost with this agent still following its intention
    cost_after: float
    joint: np.ndarray | None = None  # (N, H, 2) for the joint planner


def _box(v_max: float, H: int):
    hi = np.full(2 * H, v_max)
    return -hi, hi


def plan_sma_nbo(
    i: int,
    belief: FilterState,
    agents: Sequence[AgentState],
    specs: Sequence[AgentSpec],
    confirmed: Mapping[int, Plan],
    intentions: Mapping[int, Intention],
    occlusion_set,
    params: ObjectiveParams,
    pso: PsoParams = PsoParams(),
    rng: np.random.Generator | None = None,
) -> PlanOutcome:
    """Improve agent i's plan holding the others fixed.

    Agents already planned this epoch contribute their confirmed plans, the rest their
    intentions. Agent i's own intention is injected into the swarm, so the returned
    plan never scores worse than it.
    """
    N, H = len(agents), params.H
    base = np.zeros((N, H, 2))
    for j in range(N):
        if j == i:
            continue
        if j in confirmed:
            base[j] = confirmed[j].actions
        elif j in intentions:
            base[j] = intentions[j].actions
        else:
            raise ValueError(f"missing intention for agent {j}")
    own = intentions[i].actions if i in intentions else np.zeros((H, 2))
    base[i] = clip_plan(own, specs[i].v_max)

    obj = NominalObjective(belief, agents, specs, occlusion_set, params)
    cost_before = float(obj.batch(base[None])[0])

    def batch(X: np.ndarray) -> np.ndarray:
        A = np.repeat(base[None], len(X), axis=0)
        A[:, i] = X.reshape(len(X), H, 2)
        return obj.batch(A)

    best, _ = pso_minimize(batch, _box(specs[i].v_max, H), pso, seeds=[base[i].ravel()], rng=rng, vectorized=True)
    joint = base.copy()
    joint[i] = clip_plan(best.reshape(H, 2), specs[i].v_max)
    cost_after = float(obj.batch(joint[None])[0])
    return PlanOutcome(Plan(i, joint[i].copy()), cost_before, cost_after)


def plan_team_sma(
    belief: FilterState,
    agents: Sequence[AgentState],
    specs: Sequence[AgentSpec],
    intentions: Mapping[int, Intention],
    occlusion_set,
    params: ObjectiveParams,
    pso: PsoParams,
    rngs: Sequence[np.random.Generator],
    order: Sequence[int] | None = None,
) -> list[PlanOutcome]:
    """One SMA decision epoch; outcomes are returned indexed by agent."""
    order = list(range(len(agents))) if order is None else list(order)
    confirmed: dict[int, Plan] = {}
    outcomes: dict[int, PlanOutcome] = {}
    for i in order:
        out = plan_sma_nbo(i, belief, agents, specs, confirmed, intentions, occlusion_set, params, pso, rngs[i])
        confirmed[i] = out.plan
        outcomes[i] = out
    return [outcomes[i] for i in range(len(agents))]


def plan_dec_pomdp(
    i: int,
    local_belief: FilterState,
    agents: Sequence[AgentState],
    specs: Sequence[AgentSpec],
    occlusion_set,
    params: ObjectiveParams,
    pso: PsoParams = PsoParams(),
    rng: np.random.Generator | None = None,
    warm_start: np.ndarray | None = None,
) -> PlanOutcome:
    """Agent i optimises the whole team's plan on its own belief and keeps its own part.

    No plans are exchanged; agents agree only as far as their fused beliefs agree.
    """
    N, H = len(agents), params.H
    obj = NominalObjective(local_belief, agents, specs, occlusion_set, params)
    vmax = np.array([s.v_max for s in specs])
    hi = np.repeat(vmax, 2 * H)
    seeds = [] if warm_start is None else [np.asarray(warm_start, dtype=float).ravel()]
    start = np.zeros((N, H, 2)) if warm_start is None else np.asarray(warm_start, dtype=float).reshape(N, H, 2)
    cost_before = float(obj.batch(start[None])[0])
    best, _ = pso_minimize(lambda X: obj.batch(X.reshape(len(X), N, H, 2)), (-hi, hi), pso, seeds=seeds, rng=rng, vectorized=True)
    joint = np.array([clip_plan(p, s.v_max) for p, s in zip(best.reshape(N, H, 2), specs)])
    cost_after = float(obj.batch(joint[None])[0])
    return PlanOutcome(Plan(i, joint[i].copy()), cost_before, cost_after, joint=joint)
