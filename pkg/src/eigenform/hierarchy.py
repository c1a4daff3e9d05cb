"""Two-level (group / leader) synthesis and its timing comparison against
centralized synthesis."""

from __future__ import annotations

import hashlib
import math
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import numeric
from .assign import SynthesisResult, assign_distinct, synthesize
from .errors import EigenformError, SpecError, ZeroGroupConfiguration
from .model import MultiAgentSystem, SystemShape
from .topology import line_spec, star_spec, verify_formation

GROUP_SHIFT = 1e-3
LEADER_OFFSET = 0.5


@dataclass(frozen=True)
class Partition:
    """Disjoint agent groups; the first index of each group is its leader."""

    groups: tuple

    def __init__(self, groups: Sequence[Sequence[int]]):
        groups = tuple(tuple(int(i) for i in g) for g in groups)
        if any(not g for g in groups):
            raise SpecError("groups must be nonempty")
        flat = [i for g in groups for i in g]
        if sorted(flat) != list(range(len(flat))):
            raise SpecError("groups must be disjoint and cover agents 0..n-1")
        object.__setattr__(self, "groups", groups)

    @property
    def n(self) -> int:
        return sum(len(g) for g in self.groups)

    @property
    def leaders(self) -> list[int]:
        return [g[0] for g in self.groups]

    def sizes(self) -> list[int]:
        return [len(g) for g in self.groups]

    def permutation(self) -> list[int]:
        """Leaders first, then followers group by group."""
        return self.leaders + [i for g in self.groups for i in g[1:]]


def balanced_partition(n: int) -> Partition:
    """``round(sqrt(n))`` groups in index order, sizes differing by at most one."""
    if n < 1:
        raise SpecError("need at least one agent")
    groups_count = max(1, round(math.sqrt(n)))
    q, r = divmod(n, groups_count)
    groups, start = [], 0
    for k in range(groups_count):
        size = q + (1 if k < r else 0)
        groups.append(range(start, start + size))
        start += size
    return Partition(groups)


@dataclass
class HierResult:
    F: np.ndarray
    F_low: np.ndarray
    F_high: np.ndarray
    group_results: list
    leader_result: SynthesisResult
    partition: Partition
    closed_loop: np.ndarray
    verified: bool | None = None
    failures: list = field(default_factory=list)


def group_eigenvalues(size: int, k: int) -> np.ndarray:
    """Default stable spectrum for group ``k`` (1-based) of the given size."""
    return -np.arange(1, size, dtype=float) - k * GROUP_SHIFT


def leader_eigenvalues(count: int) -> np.ndarray:
    return -np.arange(1, count, dtype=float) - LEADER_OFFSET


def _group_synthesis(sys, f, idx, k, topology, verify):
    g = f[list(idx)]
    if not np.any(g):
        raise ZeroGroupConfiguration(k)
    sub = MultiAgentSystem.from_agents(np.diag(sys.A)[list(idx)], sys.b_diag[list(idx)])
    try:
        if topology == "star":
            spec = star_spec(sub, g, group_eigenvalues(len(idx), k))
        elif topology == "line":
            spec = line_spec(sub, g)
        else:
            raise SpecError(f"unknown group topology {topology!r}")
        return synthesize(sub, spec, verify=verify)
    except EigenformError as exc:
        exc.group = k
        raise


def hierarchical_synthesize(sys: MultiAgentSystem, f, part: Partition, group_topology: str = "star",
                            *, verify: bool = True, workers: int | None = None) -> HierResult:
    """Synthesize ``F = F_low + F_high`` from per-group and leader-level gains.

    Each group gets a single-root gain (root = its leader); the leaders are
    then treated as one higher-level group. The leader-level system uses the
    leaders' drift *after* the group gains are applied (zero for a root row),
    so the leader block of the combined closed loop is exactly the one
    synthesized at the higher level.
    """
    if sys.shape is not SystemShape.DIAGONAL_BOTH:
        raise SpecError("hierarchical synthesis needs uncoupled agents (diagonal A and B)")
    f = numeric.as_cvector(f)
    if len(f) != sys.n or part.n != sys.n:
        raise SpecError("formation, partition, and system sizes disagree")

    jobs = [(idx, k) for k, idx in enumerate(part.groups, start=1)]
    run = lambda job: _group_synthesis(sys, f, job[0], job[1], group_topology, verify)  # noqa: E731
    if workers and workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            group_results = list(pool.map(run, jobs))
    else:
        group_results = [run(job) for job in jobs]

    n = sys.n
    F_low = np.zeros((n, n), dtype=complex)
    leader_drift = np.empty(len(jobs))
    for k, ((idx, _), res) in enumerate(zip(jobs, group_results)):
        ix = np.asarray(idx)
        F_low[np.ix_(ix, ix)] = res.F
        leader_drift[k] = res.closed_loop[0, 0].real

    leaders = part.leaders
    g0 = f[leaders]
    if not np.any(g0):
        raise ZeroGroupConfiguration(0)
    leader_sys = MultiAgentSystem.from_agents(leader_drift, sys.b_diag[leaders])
    root = int(np.argmax(np.abs(g0)))
    spec0 = star_spec(leader_sys, g0, leader_eigenvalues(len(leaders)), root=root)
    leader_result = assign_distinct(leader_sys, spec0, verify=verify)

    F_high = np.zeros((n, n), dtype=complex)
    L = np.asarray(leaders)
    F_high[np.ix_(L, L)] = leader_result.F
    F = F_low + F_high
    closed = sys.A + sys.B @ F
    out = HierResult(F=F, F_low=F_low, F_high=F_high, group_results=group_results,
                     leader_result=leader_result, partition=part, closed_loop=closed)
    if verify:
        out.verified, out.failures, _ = verify_formation(closed, f, rtol=1e-6)
    return out


@dataclass
class BenchRow:
    n: int
    centralized_ms: float
    hierarchical_ms: float
    centralized_ok: bool
    hierarchical_ok: bool
    centralized_checksum: str
    hierarchical_checksum: str

    @property
    def ratio(self) -> float:
        return self.centralized_ms / self.hierarchical_ms


@dataclass
class BenchTable:
    rows: list
    seed: int
    trials: int

    def ratios(self) -> list[float]:
        return [r.ratio for r in self.rows]

    def ratio_increasing(self) -> bool:
        rs = self.ratios()
        return all(b > a for a, b in zip(rs, rs[1:]))

    def to_csv(self) -> str:
        lines = ["n,centralized_ms,hierarchical_ms,ratio"]
        for r in self.rows:
            lines.append(f"{r.n},{r.centralized_ms:.6f},{r.hierarchical_ms:.6f},{r.ratio:.6f}")
        return "\n".join(lines) + "\n"


def random_uncoupled_system(n: int, rng: np.random.Generator) -> MultiAgentSystem:
    """Heterogeneous agents with ``a ~ U(-5, 5)`` and ``|b| ~ U(0.5, 2)``."""
    a = rng.uniform(-5.0, 5.0, n)
    b = rng.uniform(0.5, 2.0, n) * rng.choice([-1.0, 1.0], n)
    return MultiAgentSystem.from_agents(a, b)


def circle_formation(n: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(1, n + 1) / n)


def _checksum(F: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(F).tobytes()).hexdigest()[:16]


def _median_ms(fn, trials: int):
    times, out = [], None
    for _ in range(trials):
        t0 = time.perf_counter()
        out = fn()
        times.append((time.perf_counter() - t0) * 1e3)
    return statistics.median(times), out


def bench_compare(sizes: Sequence[int], trials: int = 3, seed: int = 0) -> BenchTable:
    """Median wall-clock of centralized vs hierarchical synthesis.

    Only gain computation is timed; both results are verified afterwards.
    """
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ValueError("sizes must be ascending")
    rows = []
    for n in sizes:
        rng = np.random.default_rng([seed, n])
        sys = random_uncoupled_system(n, rng)
        f = circle_formation(n)
        part = balanced_partition(n)
        central_spec = star_spec(sys, f, -np.arange(1, n, dtype=float))

        c_ms, central = _median_ms(lambda: assign_distinct(sys, central_spec, verify=False), trials)
        h_ms, hier = _median_ms(lambda: hierarchical_synthesize(sys, f, part, verify=False), trials)

        c_ok, _, _ = verify_formation(central.closed_loop, f, rtol=1e-6)
        h_ok, _, _ = verify_formation(hier.closed_loop, f, rtol=1e-6)
        rows.append(BenchRow(n, c_ms, h_ms, c_ok, h_ok, _checksum(central.F), _checksum(hier.F)))
    return BenchTable(rows=rows, seed=seed, trials=trials)
