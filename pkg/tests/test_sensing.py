import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from occtrack.sensing import (
    D_MIN,
    bearing_distance,
    generate_observations,
    measurement_covariance,
    rotation,
    soo_visible,
    split_by_class,
    visible_set,
    wrap_angle,
)
from occtrack.world_model import AgentSpec, AgentState, OcclusionObject, TargetTruth, WorldState


def test_bearing_distance_examples():
    assert bearing_distance(AgentState(0, 0), (1, 0)) == pytest.approx((1, 0))
    assert bearing_distance(AgentState(0, 0, psi=math.pi / 2), (0, 2)) == pytest.approx((2, 0))
    assert bearing_distance(AgentState(1, 1), (4, 5)) == pytest.approx((5, math.atan2(4, 3)))


@given(st.floats(-20, 20), st.floats(-20, 20), st.floats(-10, 10))
def test_bearing_wrapped(x, y, psi):
    _, rho = bearing_distance(AgentState(0, 0, psi), (x, y))
    assert -math.pi < rho <= math.pi
    assert -math.pi < wrap_angle(psi) <= math.pi


def test_covariance_examples():
    assert np.allclose(measurement_covariance(1, 0, 1), np.diag([0.1, 0.1 * math.pi]), atol=1e-15)
    assert np.allclose(measurement_covariance(1, math.pi / 2, 1), np.diag([0.1 * math.pi, 0.1]), atol=1e-15)
    G = rotation(0.3)
    expect = 2.0 * G @ np.diag([0.1 * D_MIN, 0.1 * math.pi * D_MIN]) @ G.T
    assert np.allclose(measurement_covariance(0, 0.3, 2.0), expect, atol=1e-15)


@given(st.floats(0, 100), st.floats(-10, 10), st.floats(0.01, 10))
def test_covariance_spectrum_and_period(d, rho, alpha):
    R = measurement_covariance(d, rho, alpha)
    dd = max(d, D_MIN)
    assert np.allclose(R, R.T)
    ev = np.linalg.eigvalsh(R)
    assert np.allclose(ev, sorted([0.1 * alpha * dd, 0.1 * math.pi * alpha * dd]), rtol=1e-12, atol=1e-12)
    assert np.allclose(measurement_covariance(d, rho + math.pi, alpha), R, atol=1e-12)


def test_covariance_rejects_alpha():
    with pytest.raises(ValueError):
        measurement_covariance(1, 0, 0)


def _world(targets, occ=()):
    return WorldState(0, (AgentState(0, 0),), tuple(TargetTruth(n, "human", x, y) for n, (x, y) in enumerate(targets)), tuple(occ))


def test_visibility_examples():
    spec = [AgentSpec(1, 2, 2)]
    assert visible_set(_world([(1, 1)]), spec).tolist() == [[True]]
    assert visible_set(_world([(1, 1)], [OcclusionObject(1, 1, 0.5)]), spec).tolist() == [[False]]
    assert visible_set(_world([(3, 1)]), spec).tolist() == [[False]]


def test_visibility_oracle_random():
    rng = np.random.default_rng(0)
    for _ in range(2000):
        agents = tuple(AgentState(*rng.uniform(-5, 5, 2)) for _ in range(2))
        specs = [AgentSpec(1, *rng.uniform(0.5, 3, 2)) for _ in range(2)]
        targets = tuple(TargetTruth(n, "human", *rng.uniform(-8, 8, 2)) for n in range(3))
        occ = tuple(OcclusionObject(*rng.uniform(-5, 5, 2), rng.uniform(0.2, 2)) for _ in range(2))
        got = visible_set(WorldState(0, agents, targets, occ), specs)
        for i, (a, s) in enumerate(zip(agents, specs)):
            for t, tr in enumerate(targets):
                in_fov = a.px - s.fov_half_x <= tr.px < a.px + s.fov_half_x and a.py - s.fov_half_y <= tr.py < a.py + s.fov_half_y
                hidden = any((tr.px - w.cx) ** 2 + (tr.py - w.cy) ** 2 <= w.radius**2 for w in occ)
                assert got[i, t] == (in_fov and not hidden)


def test_zero_noise_and_occluded_targets():
    w = _world([(1, 1), (-1, 0.5)], [OcclusionObject(-1, 0.5, 0.3)])
    obs = generate_observations(w, [AgentSpec(1, 2, 2)], np.random.default_rng(0), noise_scale=0.0)
    ooi, soo = split_by_class(obs)
    assert [o.truth_id for o in ooi] == [0]
    assert np.array_equal(ooi[0].z, [1.0, 1.0])
    # the occluder centre sits in the FoV and is reported
    assert len(soo) == 1 and soo[0].truth_id == -1 and np.array_equal(soo[0].z, [-1, 0.5])


def test_observation_count_matches_visible_pairs():
    rng = np.random.default_rng(3)
    agents = (AgentState(0, 0), AgentState(1, 0))
    specs = [AgentSpec(1, 2, 2), AgentSpec(1, 1, 1)]
    targets = tuple(TargetTruth(n, "human", *rng.uniform(-3, 3, 2)) for n in range(6))
    w = WorldState(0, agents, targets)
    obs = generate_observations(w, specs, rng)
    assert len(obs) == visible_set(w, specs).sum()


def test_observation_noise_covariance():
    rng = np.random.default_rng(7)
    agent = AgentState(0, 0)
    w = WorldState(0, (agent,), (TargetTruth(0, "human", 1.0, 0.5),))
    spec = [AgentSpec(1, 2, 2, alpha=1.5)]
    zs = np.array([generate_observations(w, spec, rng)[0].z for _ in range(20_000)])
    d, rho = bearing_distance(agent, (1.0, 0.5))
    R = measurement_covariance(d, rho, 1.5)
    C = np.cov(zs.T)
    assert np.linalg.norm(C - R) / np.linalg.norm(R) < 0.05
    assert np.allclose(zs.mean(axis=0), [1.0, 0.5], atol=0.02)


def test_soo_visibility_rule():
    w = WorldState(0, (AgentState(0, 0),), (TargetTruth(0, "human", 5, 5),), (OcclusionObject(0.5, 0.5, 0.3), OcclusionObject(5, 5, 1)))
    assert soo_visible(w, [AgentSpec(1, 1, 1)]).tolist() == [[True, False]]
