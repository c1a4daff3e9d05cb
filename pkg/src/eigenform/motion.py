"""Rigid formations (fixed size, free translation and rotation) and circular
motion, both built on the assignment engine."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numeric
from .assign import SynthesisResult, synthesize
from .errors import DependentPair, SpecError
from .model import (
    CircularMotion,
    EigenSpec,
    JordanBlock,
    MultiAgentSystem,
    RigidFormation,
    SystemShape,
    parallel,
)
from .topology import _stable_distinct


def _anchor_pair(f: np.ndarray, anchors) -> tuple[int, int]:
    """Rows left uncovered by the standard-basis completion.

    Defaults to agents (0, 1); if ``f_0 == f_1`` the first pair with distinct
    formation components is used so that ``[1 | f | e_i...]`` stays invertible.
    """
    n = len(f)
    if anchors is not None:
        p, q = (int(a) for a in anchors)
        if p == q or not (0 <= p < n and 0 <= q < n):
            raise SpecError(f"invalid anchor pair {anchors}")
        if f[p] == f[q]:
            raise DependentPair(f"formation components at anchors {p}, {q} coincide")
        return p, q
    for p in range(n):
        for q in range(p + 1, n):
            if f[p] != f[q]:
                return p, q
    raise DependentPair("formation vector is parallel to the ones vector")


def _two_plus_basis(f, first_eig, second_eig, lambdas, anchors) -> EigenSpec:
    f = numeric.as_cvector(f)
    n = len(f)
    if n < 2:
        raise SpecError("need at least two agents")
    one = np.ones(n, dtype=complex)
    if parallel(one, f):
        raise DependentPair("formation vector is parallel to the ones vector")
    p, q = _anchor_pair(f, anchors)
    lam = _stable_distinct(lambdas, n - 2)
    blocks = [JordanBlock(first_eig, [one]), JordanBlock(second_eig, [f])]
    for lam_i, i in zip(lam, [i for i in range(n) if i not in (p, q)]):
        e = np.zeros(n, dtype=complex)
        e[i] = 1.0
        blocks.append(JordanBlock(lam_i, [e]))
    return EigenSpec(blocks, f)


def default_stable(count: int) -> np.ndarray:
    return -np.arange(1, count + 1, dtype=float)


def rigid_spec(sys: MultiAgentSystem | None, f, lambdas=None, leaders=None) -> EigenSpec:
    """Two zero eigenvalues on ``1`` and ``f``; the leader pair are the only roots."""
    f = numeric.as_cvector(f)
    if sys is not None and len(f) != sys.n:
        raise SpecError(f"formation has {len(f)} entries, system has {sys.n} agents")
    lambdas = default_stable(len(f) - 2) if lambdas is None else lambdas
    return _two_plus_basis(f, 0.0, 0.0, lambdas, leaders)


def circular_spec(sys: MultiAgentSystem | None, f, b: float, lambdas=None, anchors=None) -> EigenSpec:
    """Eigenvalue 0 on ``1`` and ``b j`` on ``f``; the rest stable."""
    if b == 0:
        raise SpecError("rotation rate b must be nonzero")
    f = numeric.as_cvector(f)
    if sys is not None and len(f) != sys.n:
        raise SpecError(f"formation has {len(f)} entries, system has {sys.n} agents")
    lambdas = default_stable(len(f) - 2) if lambdas is None else lambdas
    return _two_plus_basis(f, 0.0, 1j * b, lambdas, anchors)


def leader_pair_of(spec: EigenSpec) -> tuple[int, int]:
    """Agents whose closed-loop rows vanish: the rows not covered by the
    standard-basis completion columns."""
    V = spec.V
    covered = {int(np.flatnonzero(V[:, k])[0]) for k in range(2, V.shape[1])
               if np.count_nonzero(V[:, k]) == 1}
    free = [i for i in range(spec.n) if i not in covered]
    if len(free) != 2:
        raise SpecError("cannot identify the leader pair from the eigenvectors")
    return free[0], free[1]


@dataclass(frozen=True, eq=False)
class RigidController:
    """Linear gain ``F`` plus the size-regulating term on the leader pair."""

    F: np.ndarray
    closed_loop: np.ndarray
    d: float
    f: np.ndarray
    leader_pair: tuple
    synthesis: SynthesisResult

    @property
    def target_distance(self) -> float:
        p, q = self.leader_pair
        return self.d * abs(self.f[q] - self.f[p])


def rigid_controller(sys: MultiAgentSystem, f, d: float, lambdas=None, leaders=None,
                     spec: EigenSpec | None = None) -> RigidController:
    if sys.shape is not SystemShape.DIAGONAL_BOTH:
        raise SpecError("rigid formation control is offered for uncoupled agents only")
    kind = RigidFormation(d)
    if spec is None:
        spec = rigid_spec(sys, f, lambdas, leaders)
    res = synthesize(sys, spec, kind)
    pair = tuple(leaders) if leaders is not None else leader_pair_of(spec)
    return RigidController(F=res.F, closed_loop=res.closed_loop, d=float(d),
                           f=spec.formation.copy(), leader_pair=pair, synthesis=res)


def rigid_term(ctrl: RigidController, x: np.ndarray) -> tuple[complex, complex]:
    """``r(x_p, x_q)``: cubic size regulation; second entry is minus the first."""
    p, q = ctrl.leader_pair
    diff = x[q] - x[p]
    r = diff * (abs(diff) ** 2 - ctrl.target_distance**2)
    return r, -r


def rigid_rhs(ctrl: RigidController, x: np.ndarray, t: float = 0.0) -> np.ndarray:
    """``x' = (A + BF) x + [r(x_p, x_q); 0]``."""
    dx = ctrl.closed_loop @ x
    p, q = ctrl.leader_pair
    rp, rq = rigid_term(ctrl, x)
    dx[p] += rp
    dx[q] += rq
    return dx


def circular_synthesis(sys: MultiAgentSystem, f, b: float, lambdas=None, anchors=None) -> SynthesisResult:
    spec = circular_spec(sys, f, b, lambdas, anchors)
    return synthesize(sys, spec, CircularMotion(b))
