"""Eigenstructure assignment: kernel bases, the distinct/semisimple engine,
the Jordan-chain engine, and the validating dispatcher.

Sign convention throughout: ``(lambda I - A) N1 + B N2 = 0`` and
``w = -N2 k`` where ``N1 k = v``, so that ``(A + B F) v = lambda v`` once
``F v = w``. Generalized vectors follow ``(A + B F) v_j = lambda v_j + v_{j-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import numeric
from .errors import (
    ChainUnsolvable,
    DependentEigvectors,
    EigvecNotInImage,
    ImageConditionFailed,
    Singular,
    SingularShift,
    SingularShiftSystem,
    SpecError,
)
from .graph import DEFAULT_TAU_REL, CommGraph, extract_graph
from .model import (
    DISTINCT_RTOL,
    EigenSpec,
    MultiAgentSystem,
    ScalableFormation,
    SpecKind,
    SystemShape,
    validate_spec,
)

IMAGE_RTOL = 1e-8
KERNEL_RTOL = 1e-9


@dataclass(frozen=True)
class KernelBasis:
    lam: complex
    N1: np.ndarray
    N2: np.ndarray
    closed_form: bool
    # set when N1 is the (square, invertible) diagonal B
    n1_diag: np.ndarray | None = None

    def coefficients(self, v: np.ndarray) -> tuple[np.ndarray, float]:
        """Solve ``N1 k = v`` in the least-squares sense; returns (k, residual)."""
        if self.n1_diag is not None:
            return v / self.n1_diag, 0.0
        return numeric.pinv_solve(self.N1, v)


def kernel_basis(sys: MultiAgentSystem, lam: complex) -> KernelBasis:
    """Basis ``[N1; N2]`` of Ker[lam I - A, B] in closed form for the shape."""
    lam = complex(lam)
    n = sys.n
    A = sys.A.astype(complex)
    B = sys.B.astype(complex)
    shift = A - lam * np.eye(n)
    if sys.shape is SystemShape.DIAGONAL_BOTH:
        return KernelBasis(lam, B, shift, True, sys.b_diag.astype(complex))
    if sys.shape is SystemShape.GENERAL_A_DIAGONAL_B:
        b = sys.b_diag
        N2 = (shift * b[np.newaxis, :]) / b[:, np.newaxis]
        return KernelBasis(lam, B, N2, True, b.astype(complex))

    # Tall B: N2 = I and (A - lam I) N1 = B.
    N1, *_ = np.linalg.lstsq(shift, B, rcond=None)
    residual = numeric.max_abs(shift @ N1 - B)
    if residual > KERNEL_RTOL * numeric.max_abs(B):
        if numeric.rank(shift) < n:
            raise SingularShift(
                f"A - ({lam})I is singular and Im B is not inside its image (residual {residual:.3e})"
            )
        raise ImageConditionFailed(f"Im B not inside Im(A - ({lam})I) (residual {residual:.3e})")
    return KernelBasis(lam, N1, np.eye(sys.m, dtype=complex), False)


def numeric_kernel_basis(sys: MultiAgentSystem, lam: complex) -> KernelBasis:
    """SVD-based basis of Ker[lam I - A, B]; independent of the closed forms."""
    n = sys.n
    M = np.hstack([complex(lam) * np.eye(n) - sys.A, sys.B])
    N = numeric.nullspace(M)
    return KernelBasis(complex(lam), N[:n], N[n:], False)


def shift_basis(sys: MultiAgentSystem, lam: complex) -> tuple[np.ndarray, np.ndarray]:
    """``(S1, S2)`` with ``(lam I - A) S1 + B S2 = -I``."""
    n = sys.n
    lam = complex(lam)
    if sys.shape in (SystemShape.DIAGONAL_BOTH, SystemShape.GENERAL_A_DIAGONAL_B):
        b = sys.b_diag
        left = lam * np.eye(n) - sys.A
        S1 = sys.B.astype(complex)
        S2 = -(left * b[np.newaxis, :]) / b[:, np.newaxis] - np.diag(1.0 / b)
        return S1, S2.astype(complex)
    M = np.hstack([lam * np.eye(n) - sys.A, sys.B])
    S = -np.linalg.pinv(M)
    if numeric.max_abs(M @ S + np.eye(n)) > KERNEL_RTOL * max(1.0, numeric.max_abs(M)):
        raise SingularShiftSystem(f"[lam I - A, B] has deficient row rank at lam={lam}")
    return S[:n], S[n:]


@dataclass
class SynthesisResult:
    F: np.ndarray
    closed_loop: np.ndarray
    W: np.ndarray
    spec: EigenSpec
    system: MultiAgentSystem
    achieved: numeric.EigReport | None = None
    graph: CommGraph | None = None
    # audit trail: per-column coefficient vectors k_i (or p_ij)
    coefficients: list = field(default_factory=list, repr=False)
    method: str = "distinct"

    @property
    def chain_residual(self) -> float:
        """``max |(A + BF) V - V J|`` against the requested structure."""
        V = self.spec.V
        return numeric.max_abs(self.closed_loop @ V - V @ self.spec.J)


def _gain_from(W: np.ndarray, V: np.ndarray) -> np.ndarray:
    # F V = W  <=>  V^T F^T = W^T
    try:
        return numeric.solve(V.T, W.T).T
    except Singular as exc:
        raise DependentEigvectors(f"eigenvector matrix is singular: {exc}") from exc


def _finish(sys, spec, W, coefficients, method, verify, tau_rel) -> SynthesisResult:
    F = _gain_from(W, spec.V)
    closed = sys.A + sys.B @ F
    res = SynthesisResult(F=F, closed_loop=closed, W=W, spec=spec, system=sys,
                          coefficients=coefficients, method=method)
    if verify:
        res.achieved = numeric.eig(closed)
        res.graph = extract_graph(F, tau_rel)
    return res


def _same_eigenvalue(a: complex, b: complex, scale: float) -> bool:
    return abs(a - b) <= DISTINCT_RTOL * scale


class _BasisCache:
    """Reuses kernel bases across numerically equal eigenvalues."""

    def __init__(self, sys, spec):
        self.sys = sys
        self.scale = 1.0 + max((abs(b.eigenvalue) for b in spec.blocks), default=0.0)
        self.items = []

    def get(self, lam):
        for key, kb in self.items:
            if _same_eigenvalue(key, lam, self.scale):
                return kb
        kb = kernel_basis(self.sys, lam)
        self.items.append((lam, kb))
        return kb


def assign_distinct(sys: MultiAgentSystem, spec: EigenSpec, *, verify: bool = True,
                    tau_rel: float = DEFAULT_TAU_REL) -> SynthesisResult:
    """``F = [w_1 .. w_n][v_1 .. v_n]^{-1}`` for specs whose chains all have
    length 1. Repeated eigenvalues are accepted as long as their eigenvectors
    are independent (semisimple assignment)."""
    if not spec.all_simple_chains:
        raise SpecError("assign_distinct needs chains of length 1; use assign_jordan")
    if spec.n != sys.n:
        raise SpecError(f"spec has dimension {spec.n}, system has {sys.n} agents")
    cache = _BasisCache(sys, spec)
    W = np.empty((sys.m, sys.n), dtype=complex)
    ks = []
    for i, blk in enumerate(spec.blocks):
        v = blk.chain[0]
        kb = cache.get(blk.eigenvalue)
        k, residual = kb.coefficients(v)
        if residual > IMAGE_RTOL * np.linalg.norm(v):
            raise EigvecNotInImage(i, residual)
        W[:, i] = -(kb.N2 @ k)
        ks.append(k)
    return _finish(sys, spec, W, ks, "distinct", verify, tau_rel)


def assign_jordan(sys: MultiAgentSystem, spec: EigenSpec, *, verify: bool = True,
                  tau_rel: float = DEFAULT_TAU_REL) -> SynthesisResult:
    """Assignment with Jordan chains.

    For each block: ``v_j = N1 p_j + S1 v_{j-1}`` is solved for ``p_j`` and
    ``w_j = -N2 p_j - S2 v_{j-1}``; finally ``F`` solves ``F V = W``.
    """
    if spec.n != sys.n:
        raise SpecError(f"spec has dimension {spec.n}, system has {sys.n} agents")
    cache = _BasisCache(sys, spec)
    shifts = []
    W = np.empty((sys.m, sys.n), dtype=complex)
    ps = []
    col = 0
    for b_idx, blk in enumerate(spec.blocks):
        kb = cache.get(blk.eigenvalue)
        S = None
        if blk.size > 1:
            for key, val in shifts:
                if _same_eigenvalue(key, blk.eigenvalue, cache.scale):
                    S = val
                    break
            if S is None:
                S = shift_basis(sys, blk.eigenvalue)
                shifts.append((blk.eigenvalue, S))
        prev = None
        for j, v in enumerate(blk.chain):
            target = v if prev is None else v - S[0] @ prev
            p, residual = kb.coefficients(target)
            if residual > IMAGE_RTOL * max(np.linalg.norm(v), np.linalg.norm(target)):
                if j == 0:
                    raise EigvecNotInImage(col, residual)
                raise ChainUnsolvable(b_idx, j, residual)
            w = -(kb.N2 @ p)
            if prev is not None:
                w = w - S[1] @ prev
            W[:, col] = w
            ps.append(p)
            prev = v
            col += 1
    return _finish(sys, spec, W, ps, "jordan", verify, tau_rel)


def synthesize(sys: MultiAgentSystem, spec: EigenSpec, kind: SpecKind = ScalableFormation(), *,
               tau_rel: float = DEFAULT_TAU_REL, verify: bool = True) -> SynthesisResult:
    """Validate the spec, route it to the matching engine, verify the result."""
    report = validate_spec(sys, spec, kind)
    if not report.ok:
        raise SpecError("; ".join(report.violations))
    if spec.all_simple_chains:
        return assign_distinct(sys, spec, verify=verify, tau_rel=tau_rel)
    return assign_jordan(sys, spec, verify=verify, tau_rel=tau_rel)


@dataclass(frozen=True)
class RoundTrip:
    eigenvalue_error: float
    min_alignment: float
    chain_residual: float
    scale: float

    def ok(self, eig_tol: float = 1e-6, align_tol: float = 1e-8, chain_rtol: float = 1e-8) -> bool:
        return (self.eigenvalue_error <= eig_tol
                and self.min_alignment > 1 - align_tol
                and self.chain_residual <= chain_rtol * self.scale)


def roundtrip(result: SynthesisResult) -> RoundTrip:
    """Compare the achieved eigenstructure with the requested one.

    Eigenvalues are matched by minimum-cost assignment. For defective specs
    the computed spectrum is ill-conditioned by nature, so their eigenvalue
    error is measured through the chain residual instead and reported as
    the chain-implied bound.
    """
    spec = result.spec
    achieved = result.achieved or numeric.eig(result.closed_loop)
    requested = spec.eigenvalues
    scale = max(1.0, numeric.max_abs(result.closed_loop)) * max(1.0, numeric.max_abs(spec.V))
    chain_res = result.chain_residual

    if spec.all_simple_chains:
        cost = np.abs(requested[:, None] - achieved.eigenvalues[None, :])
        rows, cols = linear_sum_assignment(cost)
        eig_err = float(cost[rows, cols].max()) if rows.size else 0.0
    else:
        # Exact V J V^{-1} spectrum is the requested one; the distance of A+BF
        # to it is bounded by the chain residual times cond(V).
        eig_err = chain_res * numeric.cond(spec.V)
        cols = None

    align = 1.0
    if spec.all_simple_chains:
        lam_scale = 1.0 + float(np.max(np.abs(requested)))
        for i, lam in enumerate(requested):
            others = np.delete(requested, i)
            if np.any(np.abs(others - lam) <= DISTINCT_RTOL * lam_scale):
                continue
            v = spec.V[:, i]
            u = achieved.right_eigenvectors[:, cols[i]]
            align = min(align, abs(np.vdot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v)))
    return RoundTrip(eigenvalue_error=eig_err, min_alignment=align, chain_residual=chain_res, scale=scale)
