from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigenform import (
    MultiAgentSystem,
    Partition,
    balanced_partition,
    bench_compare,
    hierarchical_synthesize,
    simulate_linear,
)
from eigenform.errors import SpecError, ZeroGroupConfiguration
from eigenform.hierarchy import circle_formation, random_uncoupled_system
from eigenform.sim import SimConfig
from eigenform.topology import verify_formation


def test_balanced_partition_examples():
    assert balanced_partition(100).sizes() == [10] * 10
    assert balanced_partition(1).sizes() == [1]
    sizes = balanced_partition(500).sizes()
    assert set(sizes) <= {22, 23} and sum(sizes) == 500


def test_partition_rejects_overlap():
    with pytest.raises(SpecError):
        Partition([[0, 1], [1, 2]])
    with pytest.raises(SpecError):
        Partition([[0], []])


def test_four_agents_two_groups():
    h = hierarchical_synthesize(MultiAgentSystem.single_integrators(4), np.ones(4), Partition([[0, 1], [2, 3]]))
    assert h.verified
    lam = np.linalg.eigvals(h.closed_loop)
    assert np.sum(np.abs(lam) < 1e-9) == 1
    assert np.sum(lam.real < -1e-9) == 3


def test_zero_group_configuration():
    f = np.array([1, 1, 0, 0], dtype=complex)
    with pytest.raises(ZeroGroupConfiguration):
        hierarchical_synthesize(MultiAgentSystem.single_integrators(4), f, Partition([[0, 1], [2, 3]]))


def test_hundred_agents_simulation():
    n = 100
    sys = random_uncoupled_system(n, np.random.default_rng([0, n]))
    f = circle_formation(n)
    h = hierarchical_synthesize(sys, f, balanced_partition(n))
    assert h.verified, h.failures
    x0 = np.random.default_rng(1).standard_normal(n) + 0j
    tr = simulate_linear(h.closed_loop, x0, SimConfig(dt=5e-3, t_max=40, record_every=20), subspace=f)
    assert tr.converged and tr.formation_error[-1] < 1e-6


def test_parallel_groups_identical():
    n = 36
    sys = random_uncoupled_system(n, np.random.default_rng(5))
    f = circle_formation(n)
    a = hierarchical_synthesize(sys, f, balanced_partition(n))
    b = hierarchical_synthesize(sys, f, balanced_partition(n), workers=4)
    assert np.array_equal(a.F, b.F)


def test_line_groups():
    n = 16
    sys = random_uncoupled_system(n, np.random.default_rng(2))
    f = circle_formation(n)
    h = hierarchical_synthesize(sys, f, balanced_partition(n), group_topology="line")
    assert h.verified, h.failures


def test_bench_small():
    t = bench_compare([10], trials=1)
    row = t.rows[0]
    assert row.centralized_ms > 0 and row.hierarchical_ms > 0
    assert t.to_csv().splitlines()[0] == "n,centralized_ms,hierarchical_ms,ratio"


def test_bench_correctness_precheck():
    row = bench_compare([50], trials=1).rows[0]
    assert row.centralized_ok and row.hierarchical_ok


def test_bench_checksums_deterministic():
    a, b = bench_compare([20, 30], trials=1, seed=3), bench_compare([20, 30], trials=1, seed=3)
    assert [(r.centralized_checksum, r.hierarchical_checksum) for r in a.rows] == \
        [(r.centralized_checksum, r.hierarchical_checksum) for r in b.rows]


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 40), st.integers(0, 10_000))
def test_block_structure_and_fixed_point(n, seed):
    rng = np.random.default_rng(seed)
    sys = random_uncoupled_system(n, rng)
    f = circle_formation(n) * rng.uniform(0.5, 2)
    part = balanced_partition(n)
    h = hierarchical_synthesize(sys, f, part)
    # F = F_low + F_high exactly; F_high lives on leader rows/columns only
    assert np.array_equal(h.F, h.F_low + h.F_high)
    L = np.asarray(part.leaders)
    assert np.array_equal(h.F_high[np.ix_(L, L)], h.leader_result.F)
    mask = np.ones((n, n), bool)
    mask[np.ix_(L, L)] = False
    assert not np.any(h.F_high[mask])
    # leaders first: block lower-triangular, leader block = leader-level closed loop
    P = part.permutation()
    M = h.closed_loop[np.ix_(P, P)]
    l = len(L)
    assert not np.any(M[:l, l:])
    assert np.abs(M[:l, :l] - h.leader_result.closed_loop).max() <= 1e-12 * max(1, np.abs(M).max())
    start = l
    for res, size in zip(h.group_results, part.sizes()):
        G = M[start:start + size - 1, start:start + size - 1]
        assert not np.any(M[start:start + size - 1, l:][:, :start - l])
        if G.size:
            assert np.all(np.linalg.eigvals(G).real < 0)
        start += size - 1
    assert np.abs(h.closed_loop @ f).max() <= 1e-8 * np.linalg.norm(f) * max(1, np.abs(h.closed_loop).max())
    assert verify_formation(h.closed_loop, f, rtol=1e-6)[0]
