"""One closed-loop trial: sense, associate, update, fuse, plan, move."""
from __future__ import annotations

import logging
import zlib

import numpy as np

from ..planning import (
    Intention,
    ObjectiveParams,
    PsoParams,
    plan_dec_pomdp,
    plan_team_sma,
    shift_intention,
    zero_intention,
)
from ..sensing import bearing_distance, generate_observations, measurement_covariance, soo_visible, split_by_class, visible_set
from ..tracking import (
    DynamicOcclusionMap,
    FilterError,
    FilterState,
    TrackEstimate,
    associate,
    consensus,
    jpda_update,
    kf_predict,
    update_occlusion_map,
)
from ..world_model import (
    AgentSpec,
    AgentState,
    OcclusionObject,
    TargetTruth,
    WorldState,
    fov_region,
    step_agent,
    step_target_truth,
)
from .config import RunConfig, ScenarioConfig
from .trace import StepRecord, TrialTrace

log = logging.getLogger(__name__)

SOO_ID_STRIDE = 100_000


def make_rng(seed: int, label: str) -> np.random.Generator:
    """Independent stream per (trial seed, concern label); stable across runs and platforms."""
    return np.random.default_rng([seed, zlib.crc32(label.encode())])


def build_world(sc: ScenarioConfig) -> tuple[WorldState, list[AgentSpec]]:
    agents = tuple(AgentState(a.x, a.y) for a in sc.agents)
    specs = [AgentSpec(a.v_max, a.fov_half[0], a.fov_half[1], a.alpha) for a in sc.agents]
    targets = tuple(TargetTruth(n, t.label, t.x, t.y, t.vx, t.vy) for n, t in enumerate(sc.targets))
    occ = tuple(OcclusionObject(o.x, o.y, o.radius, o.label) for o in sc.occlusions)
    return WorldState(0, agents, targets, occ), specs


def initial_filter(sc: ScenarioConfig) -> FilterState:
    P0 = np.diag(sc.P0)
    tracks = tuple(
        TrackEstimate(n, t.label, np.array([t.x, t.y, t.vx, t.vy], dtype=float), P0.copy())
        for n, t in enumerate(sc.targets)
    )
    return FilterState(tracks, DynamicOcclusionMap(fixed_radius=sc.planner_soo_radius))


def _local_update(state: FilterState, agent: AgentState, spec: AgentSpec, obs, run: RunConfig, sc: ScenarioConfig, i: int) -> FilterState:
    ooi_obs, soo_obs = split_by_class([o for o in obs if o.source_agent == i])

    def cov(z):
        d, rho = bearing_distance(agent, z)
        return measurement_covariance(d, rho, spec.alpha)

    tracks = list(state.ooi_tracks)
    for label in sorted({t.label for t in tracks}):
        idx = [n for n, t in enumerate(tracks) if t.label == label]
        zs = [o.z for o in ooi_obs if o.label == label]
        if not zs:
            continue
        Rs = [cov(z) for z in zs]
        group = [tracks[n] for n in idx]
        res = associate(group, zs, Rs, run.gate_chi2, run.p_d, run.clutter_density)
        for g, n in enumerate(idx):
            tracks[n] = jpda_update(tracks[n], g, res, zs, Rs)
    occ_map = state.occlusion_map
    if soo_obs:
        zs = [o.z for o in soo_obs]
        occ_map = update_occlusion_map(
            occ_map, zs, [cov(z) for z in zs], sc.soo_init_var, run.gate_chi2, id_offset=SOO_ID_STRIDE * (i + 1)
        )
    return FilterState(tuple(tracks), occ_map)


def _occlusion_set(mode: str, world: WorldState, state: FilterState):
    if mode == "apriori":
        return [[w.cx, w.cy, w.radius] for w in world.occlusions]
    if mode == "dynamic":
        return state.occlusion_map.discs()
    return []


def _record(world, specs, states, plans, costs) -> StepRecord:
    vis = visible_set(world, specs)
    fov_in = np.array(
        [[fov_region(a, s).contains(t.px, t.py) for t in world.targets] for a, s in zip(world.agents, specs)]
    )
    occluded = [int(any(w.contains(t.px, t.py) for w in world.occlusions)) for t in world.targets]
    svis = soo_visible(world, specs) if world.occlusions else np.zeros((len(specs), 0), dtype=bool)
    return StepRecord(
        k=world.k,
        agents=[[a.px, a.py, a.psi, a.vx, a.vy] for a in world.agents],
        targets=[[t.px, t.py, t.vx, t.vy] for t in world.targets],
        visibility=vis.astype(int).tolist(),
        fov_contains=fov_in.astype(int).tolist(),
        occluded=occluded,
        fov=[fov_region(a, s).as_list() for a, s in zip(world.agents, specs)],
        track_means=[[t.xi.tolist() for t in st.ooi_tracks] for st in states],
        track_traces=[[float(np.trace(t.P)) for t in st.ooi_tracks] for st in states],
        occlusion_map=[[[*t.xi.tolist(), float(np.trace(t.P))] for t in st.occlusion_map.soo_tracks] for st in states],
        soo_in_fov=svis.astype(int).tolist(),
        plans=[np.asarray(p).tolist() for p in plans],
        plan_costs=costs,
    )


def run_trial(sc: ScenarioConfig, run: RunConfig, trial_seed: int) -> TrialTrace:
    world, specs = build_world(sc)
    N = len(specs)
    H = run.H
    params = ObjectiveParams(
        H=H,
        gamma=run.gamma,
        dt=run.plan_dt or sc.plan_dt,
        q=sc.filter_q,
        occlusion_mode=run.occlusion_mode,
    )
    pso = PsoParams(run.pso.swarm_size, run.pso.iterations, run.pso.w, run.pso.c1, run.pso.c2, trial_seed)
    truth_rng = make_rng(trial_seed, "truth")
    sense_rngs = [make_rng(trial_seed, f"sense/{i}") for i in range(N)]
    pso_rngs = [make_rng(trial_seed, f"pso/{i}") for i in range(N)]
    weights = np.full((N, N), 1.0 / N)
    schedules = {n: {k: (vx, vy) for k, vx, vy in t.schedule} for n, t in enumerate(sc.targets)}

    trace = TrialTrace(
        scenario=sc.model_dump(mode="json"),
        run=run.model_dump(mode="json"),
        seed=trial_seed,
        target_names=[t.name for t in sc.targets],
        occlusions=[[o.x, o.y, o.radius] for o in sc.occlusions],
    )
    states = [initial_filter(sc) for _ in range(N)]
    intentions: dict[int, Intention] = {i: zero_intention(i, H) for i in range(N)}
    joint_warm: list[np.ndarray | None] = [None] * N

    try:
        for k in range(sc.duration + 1):
            if k > 0:
                states = [
                    FilterState(tuple(kf_predict(t, sc.dt, sc.filter_q) for t in st.ooi_tracks), st.occlusion_map)
                    for st in states
                ]
            obs = generate_observations(world, specs, sense_rngs, sc.sensor_noise_scale)
            local = [_local_update(states[i], world.agents[i], specs[i], obs, run, sc, i) for i in range(N)]
            states = consensus(local, weights, run.ci_rounds)

            plans: list[np.ndarray] = []
            costs: list[list[float]] = []
            if k < sc.duration:
                if run.alg == "sma_nbo":
                    occ = _occlusion_set(run.occlusion_mode, world, states[0])
                    outcomes = plan_team_sma(
                        states[0], world.agents, specs, intentions, occ, params, pso, pso_rngs, run.sma_order
                    )
                    plans = [o.plan.actions for o in outcomes]
                    costs = [[o.cost_before, o.cost_after] for o in outcomes]
                    intentions = {o.plan.agent: shift_intention(o.plan) for o in outcomes}
                else:
                    cache: dict[bytes, object] = {}
                    for i in range(N):
                        key = states[i].digest() + (joint_warm[i].tobytes() if joint_warm[i] is not None else b"")
                        if key not in cache:
                            occ = _occlusion_set(run.occlusion_mode, world, states[i])
                            # same solver stream for every agent: equal beliefs give equal joint plans
                            rng = make_rng(trial_seed, f"pso/dec/{k}")
                            cache[key] = plan_dec_pomdp(i, states[i], world.agents, specs, occ, params, pso, rng, joint_warm[i])
                        out = cache[key]
                        plans.append(out.joint[i])
                        costs.append([out.cost_before, out.cost_after])
                        joint_warm[i] = np.concatenate([out.joint[:, 1:], out.joint[:, -1:]], axis=1)
            trace.steps.append(_record(world, specs, states, plans, costs))
            if k == sc.duration:
                break

            agents = tuple(step_agent(a, p[0], sc.dt, s.v_max) for a, p, s in zip(world.agents, plans, specs))
            targets = []
            for n, t in enumerate(world.targets):
                nt = step_target_truth(t, sc.dt, sc.truth_q, truth_rng)
                if k + 1 in schedules[n]:
                    vx, vy = schedules[n][k + 1]
                    nt = TargetTruth(nt.id, nt.label, nt.px, nt.py, vx, vy)
                targets.append(nt)
            world = WorldState(k + 1, agents, tuple(targets), world.occlusions)
    except (FilterError, np.linalg.LinAlgError) as exc:
        log.warning("trial %d aborted at step %d: %s", trial_seed, len(trace.steps), exc)
        trace.failed = True
        trace.error = f"{type(exc).__name__} at step {len(trace.steps)}: {exc}"
    return trace
