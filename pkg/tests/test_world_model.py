import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from occtrack.world_model import (
    AgentSpec,
    AgentState,
    OcclusionObject,
    Region,
    TargetTruth,
    WorldState,
    fov_region,
    ncv_process_noise,
    ncv_transition,
    region_contains,
    step_agent,
    step_target_truth,
)

finite = st.floats(-50, 50, allow_nan=False)


def test_step_agent_straight_line():
    s = step_agent(AgentState(0, 0), (1, 0), 1.0, 2.0)
    assert (s.px, s.py, s.vx, s.vy, s.psi) == (1.0, 0.0, 1.0, 0.0, 0.0)


def test_step_agent_clips_speed():
    s = step_agent(AgentState(0, 0), (3, 4), 1.0, 2.5)
    assert math.hypot(s.vx, s.vy) == pytest.approx(2.5)
    assert (s.vx / 2.5, s.vy / 2.5) == pytest.approx((0.6, 0.8))
    assert (s.px, s.py) == pytest.approx((1.5, 2.0))


def test_step_agent_zero_action_keeps_position_and_yaw():
    s0 = AgentState(3.0, -2.0, psi=1.2)
    s = step_agent(s0, (0, 0), 0.5, 2.0)
    assert (s.px, s.py, s.psi) == (3.0, -2.0, 1.2)


@pytest.mark.parametrize("a", [(np.nan, 0), (0, np.inf), (1, 2, 3)])
def test_step_agent_rejects_bad_action(a):
    with pytest.raises(ValueError):
        step_agent(AgentState(0, 0), a, 1.0, 1.0)


@given(finite, finite, finite, finite, st.floats(0.01, 5), st.floats(0.01, 2))
def test_step_agent_speed_never_exceeds_limit(px, py, ax, ay, vmax, dt):
    s = step_agent(AgentState(px, py), (ax, ay), dt, vmax)
    assert math.hypot(s.vx, s.vy) <= vmax * (1 + 1e-12)
    assert math.hypot(s.px - px, s.py - py) <= vmax * dt * (1 + 1e-9) + 1e-12


def test_fov_region_examples():
    assert fov_region(AgentState(0, 0), AgentSpec(1, 2, 1)).as_list() == [-2, -1, 2, 1]
    assert fov_region(AgentState(5, 5), AgentSpec(1, 1, 1)).as_list() == [4, 4, 6, 6]


def test_region_half_open():
    r = Region(-2, -1, 2, 1)
    assert not region_contains(r, (2.0001, 0))
    assert not region_contains(r, (2.0, 0))
    assert region_contains(r, (-2.0, -1.0))


@given(finite, finite, st.floats(0.1, 5), st.floats(0.1, 5), st.floats(-math.pi, math.pi))
def test_fov_area_independent_of_pose(px, py, hx, hy, psi):
    r = fov_region(AgentState(px, py, psi), AgentSpec(1, hx, hy))
    assert r.area == pytest.approx(4 * hx * hy)
    assert r.contains(px, py)


def test_invalid_spec_and_world():
    with pytest.raises(ValueError):
        AgentSpec(0.0, 1, 1)
    with pytest.raises(ValueError):
        WorldState(0, (), ())
    with pytest.raises(ValueError):
        Region(1, 0, 1, 2)


def test_ncv_noiseless():
    t = step_target_truth(TargetTruth(0, "human", 0, 0, 1, 0), 1.0, 0.0)
    assert (t.px, t.py, t.vx, t.vy) == (1.0, 0.0, 1.0, 0.0)


def test_soo_static():
    t = TargetTruth(0, "tree", 2, 3, 0, 0)
    assert step_target_truth(t, 0.7, 5.0, np.random.default_rng(0)) == t


def test_ncv_monte_carlo_mean():
    rng = np.random.default_rng(1)
    q, dt, n = 0.3, 0.5, 100_000
    x0 = np.array([1.0, -1.0, 0.5, 2.0])
    samples = x0 @ ncv_transition(dt).T + rng.multivariate_normal(np.zeros(4), ncv_process_noise(q, dt), size=n)
    sigma = math.sqrt(q * dt**3 / 3)
    mean_pred = ncv_transition(dt) @ x0
    assert np.all(np.abs(samples[:, :2].mean(axis=0) - mean_pred[:2]) < 3 * sigma / math.sqrt(n))
    # the single-step sampler uses the same law
    t = TargetTruth(0, "human", *x0)
    one = np.array([step_target_truth(t, dt, q, rng).position for _ in range(2000)])
    assert np.all(np.abs(one.mean(axis=0) - mean_pred[:2]) < 4 * sigma / math.sqrt(2000))


def test_ncv_needs_rng_when_noisy():
    with pytest.raises(ValueError):
        step_target_truth(TargetTruth(0, "human", 0, 0), 1.0, 0.1)


@given(st.floats(0.01, 3), st.floats(0.01, 3), st.floats(0, 2))
def test_ncv_semigroup(dt1, dt2, q):
    F = ncv_transition(dt1 + dt2)
    assert np.allclose(F, ncv_transition(dt2) @ ncv_transition(dt1))
    Q = ncv_transition(dt2) @ ncv_process_noise(q, dt1) @ ncv_transition(dt2).T + ncv_process_noise(q, dt2)
    assert np.allclose(Q, ncv_process_noise(q, dt1 + dt2))


def test_occlusion_disc_contains():
    w = OcclusionObject(0, 0, 1.0)
    assert w.contains(1.0, 0) and not w.contains(1.01, 0)
    with pytest.raises(ValueError):
        OcclusionObject(0, 0, 0.0)
