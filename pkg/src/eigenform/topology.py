"""Topology design on top of eigenstructure assignment.

Covers the absent-edge predicate (decides zero entries of the closed loop
without computing F), generators for star / cyclic / line topologies,
topology-constrained re-synthesis, and the reachable formations of a
single-input directed line.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import numeric
from .assign import SynthesisResult, kernel_basis
from .errors import (
    ReducedSystemDegenerate,
    RootComponentZero,
    Singular,
    SingularV,
    SpecError,
    ZeroComponent,
    ZeroDiagonal,
)
from .graph import (  # noqa: F401  (re-exported)
    DEFAULT_TAU_REL,
    CommGraph,
    extract_graph,
    has_spanning_tree,
    is_2_rooted,
    root_pairs,
    roots,
)
from .model import EigenSpec, JordanBlock, MultiAgentSystem, SystemShape

PREDICT_RTOL = 1e-9
VERIFY_RTOL = 1e-7


def _stable_distinct(lambdas, count: int) -> np.ndarray:
    lam = np.asarray(lambdas, dtype=complex).reshape(-1)
    if lam.size != count:
        raise SpecError(f"expected {count} eigenvalues, got {lam.size}")
    if np.any(lam.real >= 0):
        raise SpecError("all assigned eigenvalues must have negative real part")
    if lam.size > 1:
        gaps = np.abs(lam[:, None] - lam[None, :]) + np.eye(lam.size)
        if np.min(gaps) <= 1e-9 * (1 + np.max(np.abs(lam))):
            raise SpecError("eigenvalues must be distinct")
    return lam


def _check_dim(sys: MultiAgentSystem | None, f: np.ndarray):
    if sys is not None and len(f) != sys.n:
        raise SpecError(f"formation has {len(f)} entries, system has {sys.n} agents")


def predict_absent_edges(spec: EigenSpec, pairs: Iterable[tuple[int, int]],
                         rtol: float = PREDICT_RTOL) -> list[bool]:
    """For each entry ``(i, j)``, predict whether ``(A + BF)[i, j]`` vanishes.

    Uses ``sum_k lambda_k V[i, k] Vinv[k, j]``, which needs only the spec.
    Valid for distinct-eigenvalue specs with a single zero eigenvalue.
    """
    if not spec.all_simple_chains:
        raise SpecError("absent-edge prediction needs length-1 chains")
    if len(spec.zero_blocks()) != 1:
        raise SpecError("absent-edge prediction needs exactly one zero eigenvalue")
    V = spec.V
    try:
        Vinv = numeric.inv(V)
    except Singular as exc:
        raise SingularV(str(exc)) from exc
    lam = spec.eigenvalues
    out = []
    for i, j in pairs:
        if i == j:
            raise ValueError(f"pair ({i}, {j}) is on the diagonal")
        terms = lam * V[i, :] * Vinv[:, j]
        scale = max(1.0, float(np.sum(np.abs(terms))))
        out.append(bool(abs(np.sum(terms)) <= rtol * scale))
    return out


def star_spec(sys: MultiAgentSystem | None, f, lambdas, root: int = 0) -> EigenSpec:
    """Eigenvectors ``[f | e_i for i != root]``: every agent listens to the root only."""
    f = numeric.as_cvector(f)
    _check_dim(sys, f)
    n = len(f)
    if f[root] == 0:
        raise RootComponentZero(f"formation component of root {root} is zero")
    lam = _stable_distinct(lambdas, n - 1)
    blocks = [JordanBlock(0.0, [f])]
    others = [i for i in range(n) if i != root]
    for lam_i, i in zip(lam, others):
        e = np.zeros(n, dtype=complex)
        e[i] = 1.0
        blocks.append(JordanBlock(lam_i, [e]))
    return EigenSpec(blocks, f)


def _nonzero_formation(sys, f) -> np.ndarray:
    f = numeric.as_cvector(f)
    _check_dim(sys, f)
    if np.any(f == 0):
        raise ZeroComponent("every formation component must be nonzero")
    return f


def cyclic_spec(sys: MultiAgentSystem | None, f) -> EigenSpec:
    """Eigenvalues ``omega^k - 1`` with eigenvectors ``f_i omega^{ik}``."""
    f = _nonzero_formation(sys, f)
    n = len(f)
    k = np.arange(n)
    omega = np.exp(2j * np.pi / n)
    eigenvalues = omega**k - 1
    eigenvalues[0] = 0.0
    V = f[:, None] * omega ** np.outer(k, k)
    return EigenSpec.from_columns(eigenvalues, V, formation=f)


def line_spec(sys: MultiAgentSystem | None, f) -> EigenSpec:
    """Zero eigenvalue on ``f`` plus one Jordan chain at -1 whose k-th vector
    is ``-f`` restricted to the last k agents."""
    f = _nonzero_formation(sys, f)
    n = len(f)
    blocks = [JordanBlock(0.0, [f])]
    if n > 1:
        chain = []
        for k in range(1, n):
            v = np.zeros(n, dtype=complex)
            v[n - k:] = -f[n - k:]
            chain.append(v)
        blocks.append(JordanBlock(-1.0, chain))
    return EigenSpec(blocks, f)


def star_closed_loop(f, lambdas, root: int = 0) -> np.ndarray:
    f = numeric.as_cvector(f)
    n = len(f)
    M = np.zeros((n, n), dtype=complex)
    for lam_i, i in zip(np.asarray(lambdas, dtype=complex), [i for i in range(n) if i != root]):
        M[i, i] = lam_i
        M[i, root] = -lam_i * f[i] / f[root]
    return M


def cyclic_closed_loop(f) -> np.ndarray:
    f = numeric.as_cvector(f)
    n = len(f)
    M = -np.eye(n, dtype=complex)
    for i in range(n):
        M[i, (i + 1) % n] += f[i] / f[(i + 1) % n]
    return M


def line_closed_loop(f) -> np.ndarray:
    f = numeric.as_cvector(f)
    n = len(f)
    M = np.zeros((n, n), dtype=complex)
    for i in range(1, n):
        M[i, i] = -1.0
        M[i, i - 1] = f[i] / f[i - 1]
    return M


def line_gain(sys: MultiAgentSystem, f) -> np.ndarray:
    """Closed-form line-topology gain for uncoupled agents."""
    f = numeric.as_cvector(f)
    a = np.diag(sys.A)
    b = sys.b_diag
    F = np.zeros((sys.n, sys.n), dtype=complex)
    F[0, 0] = -a[0] / b[0]
    for i in range(1, sys.n):
        F[i, i] = -(1 + a[i]) / b[i]
        F[i, i - 1] = f[i] / (b[i] * f[i - 1])
    return F


@dataclass(frozen=True)
class TopologyConstraint:
    """``(i, j)`` in ``forbidden`` means agent i must not use agent j's state."""

    forbidden: frozenset

    def __init__(self, forbidden: Iterable[tuple[int, int]]):
        pairs = frozenset((int(i), int(j)) for i, j in forbidden)
        for i, j in pairs:
            if i == j:
                raise SpecError(f"constraint ({i}, {j}) is a self-loop")
        object.__setattr__(self, "forbidden", pairs)

    def by_row(self) -> dict:
        rows = defaultdict(list)
        for i, j in sorted(self.forbidden):
            rows[i].append(j)
        return dict(rows)


@dataclass
class ConstrainedResult:
    F: np.ndarray
    closed_loop: np.ndarray
    achieved: numeric.EigReport
    verified: bool
    graph: CommGraph
    noops: list = field(default_factory=list)
    row_residuals: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)


def verify_formation(closed_loop, f, rtol: float = VERIFY_RTOL) -> tuple[bool, list, numeric.EigReport]:
    """Simple zero eigenvalue with eigenvector along ``f``, every other
    eigenvalue strictly in the open left half-plane."""
    rep = numeric.eig(closed_loop)
    scale = max(1.0, numeric.max_abs(closed_loop))
    lam = rep.eigenvalues
    failures = []
    zero = np.flatnonzero(np.abs(lam) < rtol * scale)
    if zero.size != 1:
        failures.append(f"{zero.size} eigenvalues near zero, expected 1")
    else:
        v = rep.right_eigenvectors[:, zero[0]]
        cos = abs(np.vdot(v, f)) / (np.linalg.norm(v) * np.linalg.norm(f))
        if not cos > 1 - rtol:
            failures.append(f"zero-eigenvalue eigenvector misaligned with f (|cos|={cos:.10f})")
    rest = np.delete(lam, zero)
    bad = rest[rest.real >= -rtol * scale]
    if bad.size:
        failures.append(f"eigenvalues not strictly stable: {bad.tolist()}")
    return not failures, failures, rep


def constrain_zero(sys: MultiAgentSystem, spec: EigenSpec, base: SynthesisResult,
                   constraint: TopologyConstraint, tau_rel: float = DEFAULT_TAU_REL) -> ConstrainedResult:
    """Zero out forbidden gains and re-fit the affected rows by least squares.

    Rows of ``F V = B^{-1}(V J - A V)`` are independent, so each constrained
    row drops its forbidden unknowns and is re-solved with the pseudoinverse;
    all other rows are kept as they are. The new closed loop is checked
    again; failing that check is a reported outcome, not an exception.
    """
    if sys.m != sys.n:
        raise SpecError("topology constraints need one input per agent")
    n = sys.n
    V = spec.V
    psi = sys.b_inverse() @ (V @ spec.J - sys.A @ V)
    F = base.F.copy()
    tau = tau_rel * max(1.0, numeric.max_abs(base.F))
    noops = []
    residuals = {}
    for i, cols in constraint.by_row().items():
        if not (0 <= i < n and all(0 <= j < n for j in cols)):
            raise SpecError(f"constraint row {i} / columns {cols} out of range")
        active = [j for j in cols if abs(base.F[i, j]) > tau]
        noops += [(i, j) for j in cols if j not in active]
        F[i, cols] = 0.0
        if not active:
            continue
        keep = [c for c in range(n) if c not in cols]
        Vhat_T = V.T[:, keep]
        if numeric.rank(Vhat_T) < len(keep):
            raise ReducedSystemDegenerate(f"reduced system for row {i} has deficient column rank")
        x, res = numeric.pinv_solve(Vhat_T, psi[i])
        F[i, keep] = x
        residuals[i] = res
    closed = sys.A + sys.B @ F
    ok, failures, rep = verify_formation(closed, spec.formation)
    return ConstrainedResult(F=F, closed_loop=closed, achieved=rep, verified=ok,
                             graph=extract_graph(F, tau_rel), noops=noops,
                             row_residuals=residuals, failures=failures)


def _check_simo_line(sys: MultiAgentSystem):
    if sys.shape is not SystemShape.GENERAL_A_TALL_B or sys.m != 1:
        raise SpecError("expected a single-input system with B = [b1; 0; ...; 0]")
    A = sys.A
    if np.any(np.triu(A, 1)) or np.any(np.tril(A, -2)):
        raise SpecError("A must be lower bidiagonal")


def simo_line_formation_set(sys: MultiAgentSystem) -> np.ndarray:
    """Generator of every formation reachable by steering only the root of a
    directed line: ``g_1 = b1/a1`` and ``g_i = -ahat_i g_{i-1} / a_i``."""
    if sys.n == 1 and sys.m == 1:
        a1 = sys.A[0, 0]
        if a1 == 0:
            raise ZeroDiagonal("a_1 is zero")
        return np.array([sys.B[0, 0] / a1], dtype=complex)
    _check_simo_line(sys)
    a = np.diag(sys.A)
    if np.any(a == 0):
        raise ZeroDiagonal(f"diagonal entries {np.flatnonzero(a == 0).tolist()} of A are zero")
    g = np.empty(sys.n, dtype=complex)
    g[0] = sys.B[0, 0] / a[0]
    for i in range(1, sys.n):
        g[i] = -sys.A[i, i - 1] * g[i - 1] / a[i]
    return g


def single_input_spec(sys: MultiAgentSystem, f, lambdas: Sequence[complex]) -> EigenSpec:
    """Spec for a tall-B system: ``f`` at eigenvalue 0, and at each remaining
    eigenvalue the (forced) direction ``N1(lambda) 1``."""
    f = numeric.as_cvector(f)
    _check_dim(sys, f)
    lam = _stable_distinct(lambdas, sys.n - 1)
    blocks = [JordanBlock(0.0, [f])]
    for lam_i in lam:
        N1 = kernel_basis(sys, lam_i).N1
        blocks.append(JordanBlock(lam_i, [N1.sum(axis=1)]))
    return EigenSpec(blocks, f)
