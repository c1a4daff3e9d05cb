from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import ORACLES, PENTA_X0, PENTAGON, cmatrix, consensus5_spec, pentagon_spec, pentagon_system, \
    random_system
from eigenform import (
    EigenSpec,
    MultiAgentSystem,
    SimConfig,
    assign_distinct,
    predict_limit,
    report,
    rigid_controller,
    simulate_linear,
    simulate_rigid,
    synthesize,
)
from eigenform.errors import Diverged, NotSimpleZero, SpecError
from eigenform.motion import rigid_spec
from eigenform.sim import fit_formation, rk4


def test_config_validation():
    for kw in ({"dt": 0}, {"t_max": 1e-4, "dt": 1e-3}, {"convergence_tol": 0}, {"convergence_window": 0}):
        with pytest.raises(ValueError):
            SimConfig(**kw)


def test_two_agent_limit():
    M = np.array([[-1.0, 1], [0, 0]])
    tr = simulate_linear(M, [5, 1], SimConfig(t_max=30))
    assert tr.converged
    assert np.allclose(tr.final, [1, 1], atol=1e-9)
    spec = EigenSpec.from_columns([0, -1], np.array([[1, 1], [1, 0]], float))
    assert np.allclose(predict_limit(spec, None, [5, 1]), [1, 1])


def test_start_on_formation():
    r = synthesize(pentagon_system(), pentagon_spec())
    tr = simulate_linear(r.closed_loop, 2j * PENTAGON, SimConfig(t_max=2))
    assert tr.formation_error.max() < 1e-9
    assert tr.time_to_converge == 0.0


def test_pentagon_convergence():
    r = synthesize(pentagon_system(), pentagon_spec())
    tr = simulate_linear(r.closed_loop, PENTA_X0, SimConfig(), subspace=PENTAGON)
    assert tr.converged and tr.formation_error[-1] < 1e-6
    assert np.abs(tr.limit_estimate - predict_limit(r.spec, r, PENTA_X0)).max() < 1e-5
    rep = report(tr, PENTAGON, SimConfig())
    assert rep.converged and rep.to_dict()["convergence_window"] == 5


def test_predict_limit_examples():
    spec = consensus5_spec()
    assert np.allclose(predict_limit(spec, None, np.eye(5)[0]), np.ones(5))
    f = PENTAGON
    assert np.allclose(predict_limit(pentagon_spec(), None, f), f)


def test_predict_limit_rejects_rigid():
    with pytest.raises(NotSimpleZero):
        predict_limit(rigid_spec(None, PENTAGON), None, PENTA_X0)


def test_divergence_reported():
    with pytest.raises(Diverged):
        simulate_linear(np.array([[5.0]]), [1.0], SimConfig(dt=0.01, t_max=10))


def test_rigid_d5_size():
    ctrl = rigid_controller(pentagon_system(), PENTAGON, 5.0)
    tr = simulate_rigid(ctrl, PENTA_X0)
    x = tr.final
    assert abs(abs(x[1] - x[0]) - 5 * abs(PENTAGON[1] - PENTAGON[0])) < 1e-3
    assert abs(abs(x[1] - x[0]) - 5.8779) < 1e-3
    assert report(tr, PENTAGON, SimConfig(), with_translation=True).size == pytest.approx(5.0, rel=1e-3)


def test_rigid_on_target_stays():
    ctrl = rigid_controller(pentagon_system(), PENTAGON, 5.0)
    x0 = (0.3 - 1j) + 5 * PENTAGON
    tr = simulate_rigid(ctrl, x0, SimConfig(t_max=3))
    assert tr.formation_error.max() < 1e-6 and tr.time_to_converge == 0.0


def test_rigid_rejects_equal_leaders():
    ctrl = rigid_controller(pentagon_system(), PENTAGON, 5.0)
    with pytest.raises(SpecError):
        simulate_rigid(ctrl, np.ones(5))


def test_rk4_order():
    r = synthesize(pentagon_system(), pentagon_spec())
    dt, T = ORACLES["rk4"]["dt"], ORACLES["rk4"]["t_max"]

    def end(h):
        return rk4(lambda x, t: r.closed_loop @ x, PENTA_X0, SimConfig(dt=h, t_max=T, record_every=10**9))[1][-1]

    ref = end(dt / 8)
    ratio = np.linalg.norm(end(dt) - ref) / np.linalg.norm(end(dt / 2) - ref)
    assert 12 <= ratio <= 20
    assert ratio == pytest.approx(ORACLES["rk4"]["ratio"], rel=1e-6)


def test_faster_spectrum_converges_faster():
    sys = MultiAgentSystem.single_integrators(4)
    one = np.ones(4)
    slow = EigenSpec.from_columns([0, -1, -3, -4], np.column_stack([one, [1, 1, 0, 1], [1, 0, 0, 1], [0, 0, 1, -1]]))
    fast = EigenSpec.from_columns([0, -2, -3, -4],
                                  np.column_stack([one, [1, 1, 0, 1], [1, 0, 0, 1], [0, 0, 0.5, -1]]))
    F_slow, F_fast = assign_distinct(sys, slow).F, assign_distinct(sys, fast).F
    assert np.abs(F_fast - cmatrix(ORACLES["consensus4"]["F2_prime"])).max() < 1e-12
    # same zero pattern
    assert np.array_equal(np.abs(F_slow) < 1e-12, np.abs(F_fast) < 1e-12)
    x0 = np.array([1.0, -2.0, 0.5, 3.0])
    cfg = SimConfig(t_max=3, dt=1e-3, record_every=3000)
    e_slow = simulate_linear(F_slow, x0, cfg, subspace=one).formation_error[-1]
    e_fast = simulate_linear(F_fast, x0, cfg, subspace=one).formation_error[-1]
    assert e_fast < e_slow


def test_fit_formation():
    x = (1 + 2j) + (0.5 - 1j) * PENTAGON
    c, cp, resid = fit_formation(x, PENTAGON)
    assert np.isclose(c, 1 + 2j) and np.isclose(cp, 0.5 - 1j) and resid < 1e-12


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10_000))
def test_limit_matches_prediction(n, seed):
    rng = np.random.default_rng(seed)
    sys = random_system(rng, n)
    f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    V = np.column_stack([f, rng.standard_normal((n, n - 1))])
    if np.linalg.cond(V) > 1e3:
        return
    spec = EigenSpec.from_columns(np.r_[0, -rng.uniform(0.8, 3, n - 1)], V)
    r = synthesize(sys, spec)
    x0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    tr = simulate_linear(r.closed_loop, x0, SimConfig(dt=2e-3, t_max=30, record_every=50), subspace=f)
    if tr.converged:
        assert np.abs(tr.limit_estimate - predict_limit(spec, r, x0)).max() <= 1e-5
