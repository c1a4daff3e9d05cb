from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ENCIRCLE_X0, ORACLES, PENTAGON, cmatrix, encircle_system, pentagon_system, random_system
from eigenform import (
    MultiAgentSystem,
    SimConfig,
    circular_synthesis,
    rigid_controller,
    roundtrip,
    simulate_linear,
    simulate_rigid,
)
from eigenform.errors import DependentPair, SpecError
from eigenform.motion import rigid_spec, rigid_term
from eigenform.sim import fit_formation, modal_coefficients, transient_cutoff

F6 = np.append(PENTAGON, 0)


def test_rigid_gain():
    ctrl = rigid_controller(pentagon_system(), PENTAGON, 5.0)
    F = cmatrix(ORACLES["planar_motion"]["rigid_F"])
    assert np.abs(ctrl.F - F).max() <= 1e-9
    assert abs(ctrl.F[0, 0] + 8) < 1e-3 and abs(ctrl.F[1, 1] + 3.1333) < 1e-3
    assert ctrl.leader_pair == (0, 1)
    assert np.isclose(ctrl.target_distance, ORACLES["planar_motion"]["rigid_target_distance_d5"], rtol=1e-12)


def test_rigid_three_agents():
    ctrl = rigid_controller(MultiAgentSystem.single_integrators(3), [0, 1, 2], 1.0, lambdas=[-1])
    lam = np.sort_complex(np.linalg.eigvals(ctrl.closed_loop))
    assert np.allclose(lam, [-1, 0, 0], atol=1e-12)
    M = ctrl.closed_loop
    assert np.abs(M @ np.ones(3)).max() < 1e-12 and np.abs(M @ np.array([0, 1, 2])).max() < 1e-12


def test_rigid_parallel_formation_rejected():
    with pytest.raises(DependentPair):
        rigid_spec(None, 2 * np.ones(4))


def test_rigid_term_examples():
    ctrl = rigid_controller(pentagon_system(), PENTAGON, 5.0)
    x = np.zeros(5, complex)
    x[1] = 5 * (PENTAGON[1] - PENTAGON[0]) * np.exp(0.7j)
    assert abs(rigid_term(ctrl, x)[0]) < 1e-12
    assert rigid_term(ctrl, np.ones(5, complex)) == (0, 0)


def test_rigid_rejects_coupled_system():
    sys = MultiAgentSystem(np.array([[0, 1.0], [0, 0]]), np.eye(2))
    with pytest.raises(SpecError):
        rigid_controller(sys, [0, 1], 1.0)


def test_circular_gain():
    r = circular_synthesis(encircle_system(), F6, 1.0, [-1, -2, -3, -4], anchors=(0, 5))
    F = cmatrix(ORACLES["planar_motion"]["circular_F"])
    assert np.abs(r.F - F).max() <= 1e-9
    assert abs(r.F[0, 0] - (-8 + 5j)) < 1e-3 and abs(r.F[0, 5] - (-5j)) < 1e-3
    assert np.all(r.F[5] == 0)
    assert roundtrip(r).ok()


def test_circular_two_agents():
    r = circular_synthesis(MultiAgentSystem.single_integrators(2), [1, -1], 1.0, lambdas=[])
    lam = np.sort_complex(np.linalg.eigvals(r.closed_loop))
    assert np.allclose(lam, [0, 1j], atol=1e-12)


def test_circular_direction_flip():
    sys = encircle_system()
    pos = circular_synthesis(sys, F6, 1.0, [-1, -2, -3, -4], anchors=(0, 5))
    neg = circular_synthesis(sys, F6, -1.0, [-1, -2, -3, -4], anchors=(0, 5))
    # the gains differ only through the rotating block: F(b) - F(-b) = 2 b j B^-1 f w_f^T
    V = pos.spec.V
    w = np.linalg.inv(V)[1]
    diff = pos.F - neg.F
    assert np.abs(diff - 2j * np.outer(sys.b_inverse() @ F6, w)).max() < 1e-9
    cfg = SimConfig(t_max=20)
    rates = []
    for r, b in ((pos, 1.0), (neg, -1.0)):
        tr = simulate_linear(r.closed_loop, ENCIRCLE_X0, cfg, subspace=np.column_stack([np.ones(6), F6]))
        m = tr.times >= transient_cutoff(r.spec)
        cp = modal_coefficients(r.spec, tr.states[m], 1j * b)
        rates.append(np.polyfit(tr.times[m], np.unwrap(np.angle(cp)), 1)[0])
    assert rates[0] > 0.99 and rates[1] < -0.99


@settings(max_examples=8, deadline=None)
@given(st.integers(3, 6), st.integers(0, 10_000), st.sampled_from([1.0, 2.5]))
def test_rigid_steady_size(n, seed, d):
    rng = np.random.default_rng(seed)
    sys = random_system(rng, n)
    f = np.exp(2j * np.pi * np.arange(n) / n)
    ctrl = rigid_controller(sys, f, d)
    x0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    tr = simulate_rigid(ctrl, x0, SimConfig(dt=2e-3, t_max=30, record_every=50))
    x = tr.final
    p, q = ctrl.leader_pair
    assert abs(abs(x[q] - x[p]) - ctrl.target_distance) <= 1e-4 * ctrl.target_distance
    _, _, resid = fit_formation(x, f)
    assert resid <= 1e-4 * max(1, np.linalg.norm(x))


@settings(max_examples=20, deadline=None)
@given(st.integers(3, 8), st.integers(0, 10_000))
def test_repeated_zero_has_two_eigenvectors(n, seed):
    rng = np.random.default_rng(seed)
    sys = random_system(rng, n)
    f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    ctrl = rigid_controller(sys, f, 1.0)
    M = ctrl.closed_loop
    scale = max(1, np.abs(M).max())
    assert np.abs(M @ np.ones(n)).max() <= 1e-8 * scale
    assert np.abs(M @ f).max() <= 1e-8 * scale * np.abs(f).max()
