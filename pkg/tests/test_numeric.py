from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import EX2_V, ORACLES, frac_matrix
from eigenform import numeric
from eigenform.errors import Singular


def test_solve_scalar_and_identity():
    assert numeric.solve([[2.0]], [[4.0]])[0, 0] == 2.0
    rhs = np.arange(6).reshape(3, 2) + 1j
    assert np.array_equal(numeric.solve(np.eye(3), rhs), rhs)


def test_solve_example_inverse():
    X = numeric.solve(EX2_V, np.eye(5))
    assert numeric.max_abs(EX2_V @ X - np.eye(5)) < 1e-12
    row = [float(x) for x in ORACLES["consensus5"]["Vinv_row1"]]
    assert np.allclose(X[0], row, atol=1e-14)


def test_solve_singular():
    with pytest.raises(Singular):
        numeric.solve([[1.0, 1.0], [1.0, 1.0]], np.eye(2))


def test_pinv_solve_examples():
    x, r = numeric.pinv_solve([[1.0], [0.0]], [3.0, 0.0])
    assert np.allclose(x, [3]) and r < 1e-14
    x, r = numeric.pinv_solve([[1.0], [1.0]], [1.0, 0.0])
    assert np.allclose(x, [0.5]) and np.isclose(r, np.sqrt(0.5))


def test_pinv_solve_constrained_row():
    Vhat_T = EX2_V.T[:, [0, 1, 2, 4]]
    x, _ = numeric.pinv_solve(Vhat_T, [0, -1, 0, 0, -4])
    expected = [float(eval(s)) for s in ORACLES["consensus5"]["constrained_row"]]
    assert np.allclose(x, expected, atol=1e-12)
    assert np.allclose(x, [1.8571, -1.4286, 0.8571, -1.2857], atol=1e-3)


def test_eig_sorted_diagonal():
    rep = numeric.eig(np.diag([-1.0, 0.0]))
    assert np.array_equal(rep.eigenvalues, [0, -1])
    rep = numeric.eig(np.diag([1j, -1j, 1.0]))
    assert np.allclose(rep.eigenvalues, [1, 1j, -1j])


def test_eig_constrained_closed_loop():
    F = frac_matrix([["0"] * 5, ["13/7", "-10/7", "6/7", "0", "-9/7"], ["2", "0", "-3", "0", "1"],
                     ["3", "0", "0", "-3", "0"], ["3", "0", "1", "-1", "-3"]])
    rep = numeric.eig(F)
    assert np.allclose(rep.eigenvalues, [0, -1.4286, -2, -3, -4], atol=1e-3)


def test_eig_random_residual():
    rng = np.random.default_rng(1)
    M = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    rep = numeric.eig(M)
    assert rep.residual <= 1e-8 * numeric.max_abs(M) * 6
    assert np.allclose(np.linalg.norm(rep.right_eigenvectors, axis=0), 1)


def test_eig_refines_bad_lapack_vectors():
    # reducible matrix for which geev's zero eigenvector is inaccurate
    from eigenform.hierarchy import balanced_partition, circle_formation, hierarchical_synthesize, \
        random_uncoupled_system
    sys = random_uncoupled_system(100, np.random.default_rng([0, 100]))
    f = circle_formation(100)
    M = hierarchical_synthesize(sys, f, balanced_partition(100), verify=False).closed_loop
    rep = numeric.eig(M)
    assert rep.residual < 1e-8
    v = rep.right_eigenvectors[:, 0]
    assert abs(np.vdot(v, f)) / np.linalg.norm(f) > 1 - 1e-9


def test_rank_and_nullspace():
    M = np.hstack([-np.eye(2), np.eye(2)])
    assert numeric.nullspace(M).shape == (4, 2)
    assert numeric.rank(np.zeros((2, 2))) == 0
    ones = np.ones((2, 2))
    assert numeric.rank(ones) == 1
    N = numeric.nullspace(ones)
    assert N.shape == (2, 1)
    assert np.isclose(abs(np.vdot(N[:, 0], [1, -1])) / np.sqrt(2), 1)


finite = st.floats(-10, 10, allow_nan=False)


@st.composite
def square(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    re = draw(st.lists(finite, min_size=n * n, max_size=n * n))
    im = draw(st.lists(finite, min_size=n * n, max_size=n * n))
    return (np.array(re) + 1j * np.array(im)).reshape(n, n)


@settings(max_examples=60, deadline=None)
@given(square(), st.integers(1, 3))
def test_solve_residual_bound(M, k):
    rhs = np.arange(M.shape[0] * k).reshape(M.shape[0], k) * (1 + 0.5j)
    try:
        X = numeric.solve(M, rhs)
    except Singular:
        return
    assert numeric.max_abs(M @ X - rhs) <= 1e-10 * (1 + numeric.max_abs(M) * numeric.max_abs(X))


@settings(max_examples=60, deadline=None)
@given(square(), st.integers(0, 2))
def test_pinv_min_norm_preimage(M, drop):
    # tall matrix: keep the first n - drop columns
    M = M[:, : max(1, M.shape[1] - drop)]
    x0 = np.linspace(1, 2, M.shape[1]) * (1 - 1j)
    x, r = numeric.pinv_solve(M, M @ x0)
    if numeric.rank(M) == M.shape[1] and numeric.cond(M) < 1e6:
        assert np.linalg.norm(x - x0) <= 1e-9 * max(1.0, np.linalg.norm(x0)) * numeric.cond(M)
    assert np.linalg.norm(x) <= np.linalg.norm(x0) + 1e-8 * max(1, np.linalg.norm(x0)) * numeric.cond(M)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 7), st.integers(0, 10_000))
def test_eig_similarity_recovers_spectrum(n, seed):
    rng = np.random.default_rng(seed)
    lam = rng.uniform(-5, 5, n) + 1j * rng.uniform(-5, 5, n)
    V = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if numeric.cond(V) > 1e6:
        return
    M = V @ np.diag(lam) @ np.linalg.inv(V)
    got = numeric.eig(M).eigenvalues
    for z in lam:
        assert np.min(np.abs(got - z)) <= 1e-6 * max(1, abs(z)) * max(1, numeric.cond(V) / 1e3)
