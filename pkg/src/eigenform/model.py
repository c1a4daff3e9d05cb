"""Agent systems, eigenstructure specifications, and their validation."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import numeric
from .errors import SpecError

# Below this |lambda_i - lambda_j| / (1 + max|lambda|) two eigenvalues count as repeated.
DISTINCT_RTOL = 1e-9
# Stacked eigenvector matrices with a larger 2-norm condition number count as dependent.
INDEPENDENCE_COND = 1e8
PAIRING_TOL = 1e-9


class SystemShape(enum.Enum):
    DIAGONAL_BOTH = "DiagonalBoth"
    GENERAL_A_DIAGONAL_B = "GeneralA_DiagonalB"
    GENERAL_A_TALL_B = "GeneralA_TallB"


def _is_diagonal(M: np.ndarray) -> bool:
    return M.shape[0] == M.shape[1] and not np.any(M - np.diag(np.diag(M)))


def classify(A: np.ndarray, B: np.ndarray) -> SystemShape:
    n, m = B.shape
    if A.shape != (n, n):
        raise SpecError(f"A has shape {A.shape} but B has {n} rows")
    top = B[:m, :m]
    if np.any(B[m:]) or not _is_diagonal(top):
        raise SpecError("B must be diagonal, or a diagonal block stacked on zero rows")
    if np.any(np.diag(top) == 0):
        raise SpecError("every diagonal entry of B must be nonzero")
    if m < n:
        return SystemShape.GENERAL_A_TALL_B
    if _is_diagonal(A):
        return SystemShape.DIAGONAL_BOTH
    return SystemShape.GENERAL_A_DIAGONAL_B


@dataclass(frozen=True, eq=False)
class MultiAgentSystem:
    """Linear multi-agent system ``x' = A x + B u`` with complex states.

    ``A`` is n x n and ``B`` is n x m (m <= n), both real. The shape class is
    derived from the sparsity of ``A`` and ``B`` on construction.
    """

    A: np.ndarray
    B: np.ndarray
    shape: SystemShape = field(init=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A))
        B = np.asarray(self.B)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        if np.iscomplexobj(A) or np.iscomplexobj(B):
            raise SpecError("A and B must be real")
        A = A.astype(float)
        B = B.astype(float)
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(B))):
            raise SpecError("A and B must be finite")
        if B.shape[1] > B.shape[0]:
            raise SpecError(f"more inputs than agents: B is {B.shape}")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "shape", classify(A, B))

    @classmethod
    def from_agents(cls, a: Sequence[float], b: Sequence[float]) -> "MultiAgentSystem":
        """Uncoupled first-order agents ``x_i' = a_i x_i + b_i u_i``."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if a.shape != b.shape:
            raise SpecError("a and b must have the same length")
        return cls(np.diag(a), np.diag(b))

    @classmethod
    def single_integrators(cls, n: int) -> "MultiAgentSystem":
        return cls.from_agents(np.zeros(n), np.ones(n))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def b_diag(self) -> np.ndarray:
        return np.diag(self.B[: self.m, : self.m]).copy()

    def b_inverse(self) -> np.ndarray:
        if self.m != self.n:
            raise SpecError("B is not square; it has no inverse")
        return np.diag(1.0 / self.b_diag)

    def scale(self) -> float:
        return max(1.0, numeric.max_abs(self.A), numeric.max_abs(self.B))


@dataclass(frozen=True, eq=False)
class JordanBlock:
    """One eigenvalue with its chain; ``chain[0]`` is the eigenvector.

    Chains follow ``M v_0 = lambda v_0`` and ``M v_j = lambda v_j + v_{j-1}``.
    """

    eigenvalue: complex
    chain: tuple

    def __init__(self, eigenvalue, chain):
        chain = [numeric.as_cvector(v) for v in (chain if _is_vector_list(chain) else [chain])]
        if not chain:
            raise SpecError("a Jordan block needs at least one vector")
        n = len(chain[0])
        if any(len(v) != n for v in chain):
            raise SpecError("chain vectors must share one length")
        for v in chain:
            v.setflags(write=False)
        object.__setattr__(self, "eigenvalue", complex(eigenvalue))
        object.__setattr__(self, "chain", tuple(chain))

    @property
    def size(self) -> int:
        return len(self.chain)


def _is_vector_list(chain) -> bool:
    if isinstance(chain, (list, tuple)) and chain and np.ndim(chain[0]) == 1:
        return True
    return False


@dataclass(frozen=True, eq=False)
class EigenSpec:
    """Ordered Jordan blocks plus the formation vector they encode."""

    blocks: tuple
    formation: np.ndarray

    def __init__(self, blocks: Sequence[JordanBlock], formation):
        f = numeric.as_cvector(formation)
        f.setflags(write=False)
        object.__setattr__(self, "blocks", tuple(blocks))
        object.__setattr__(self, "formation", f)

    @classmethod
    def from_columns(cls, eigenvalues, V, formation=None) -> "EigenSpec":
        """Spec with one length-1 chain per column of ``V``."""
        V = numeric.as_cmatrix(V)
        eigenvalues = np.asarray(eigenvalues, dtype=complex).reshape(-1)
        if V.shape[1] != eigenvalues.size:
            raise SpecError(f"{eigenvalues.size} eigenvalues but {V.shape[1]} eigenvector columns")
        f = V[:, 0] if formation is None else formation
        return cls([JordanBlock(lam, [V[:, i]]) for i, lam in enumerate(eigenvalues)], f)

    @property
    def n(self) -> int:
        return len(self.formation)

    @property
    def V(self) -> np.ndarray:
        cols = [v for blk in self.blocks for v in blk.chain]
        if not cols:
            return np.zeros((self.n, 0), dtype=complex)
        return np.column_stack(cols)

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues repeated once per chain vector, in column order of ``V``."""
        return np.array([blk.eigenvalue for blk in self.blocks for _ in blk.chain], dtype=complex)

    @property
    def J(self) -> np.ndarray:
        """Jordan matrix with ``(A + BF) V = V J``."""
        lam = self.eigenvalues
        J = np.diag(lam)
        k = 0
        for blk in self.blocks:
            for j in range(1, blk.size):
                J[k + j - 1, k + j] = 1.0
            k += blk.size
        return J

    @property
    def all_simple_chains(self) -> bool:
        return all(blk.size == 1 for blk in self.blocks)

    def zero_blocks(self) -> list[int]:
        scale = 1.0 + max((abs(b.eigenvalue) for b in self.blocks), default=0.0)
        return [i for i, b in enumerate(self.blocks) if abs(b.eigenvalue) <= DISTINCT_RTOL * scale]


@dataclass(frozen=True)
class ScalableFormation:
    pass


@dataclass(frozen=True)
class RigidFormation:
    d: float

    def __post_init__(self):
        if not self.d > 0:
            raise SpecError(f"rigid formation size must be positive, got {self.d}")


@dataclass(frozen=True)
class CircularMotion:
    b: float

    def __post_init__(self):
        if self.b == 0 or not np.isfinite(self.b):
            raise SpecError("circular rate b must be a nonzero real number")


SpecKind = Union[ScalableFormation, RigidFormation, CircularMotion]


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    self_conjugate: bool = True
    condition_number: float = float("nan")

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def parallel(u, v, tol: float = 1e-9) -> bool:
    """True iff ``|<u, v>| / (|u| |v|) > 1 - tol``."""
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return False
    return abs(np.vdot(u, v)) / (nu * nv) > 1 - tol


def validate_spec(sys: MultiAgentSystem, spec: EigenSpec, kind: SpecKind = ScalableFormation()) -> ValidationReport:
    rep = ValidationReport()
    n = sys.n
    f = spec.formation
    if len(f) != n:
        rep.violations.append(f"formation vector has length {len(f)}, system has {n} agents")
        return rep
    if not np.any(f):
        rep.violations.append("formation vector is zero")
    for i, blk in enumerate(spec.blocks):
        if len(blk.chain[0]) != n:
            rep.violations.append(f"block {i} vectors have length {len(blk.chain[0])}, expected {n}")
            return rep
    total = sum(blk.size for blk in spec.blocks)
    if total != n:
        rep.violations.append(f"chain lengths sum to {total}, expected {n}")
        return rep

    V = spec.V
    rep.condition_number = numeric.cond(V)
    if not rep.condition_number < INDEPENDENCE_COND:
        rep.violations.append(f"chain vectors are dependent (cond {rep.condition_number:.3g})")
    rep.self_conjugate = is_self_conjugate(spec)

    zero = spec.zero_blocks()
    for i in zero:
        if spec.blocks[i].size > 1:
            rep.violations.append(f"zero eigenvalue of block {i} is defective (chain length {spec.blocks[i].size})")
    one = np.ones(n)
    structural = set(zero)

    if isinstance(kind, ScalableFormation):
        if len(zero) != 1:
            rep.violations.append(f"expected exactly one zero eigenvalue, found {len(zero)}")
        elif not parallel(spec.blocks[zero[0]].chain[0], f):
            rep.violations.append("eigenvector of the zero eigenvalue is not the formation vector")
    elif isinstance(kind, RigidFormation):
        if len(zero) != 2:
            rep.violations.append(f"expected exactly two zero eigenvalues, found {len(zero)}")
        else:
            vecs = [spec.blocks[i].chain[0] for i in zero]
            if not ((parallel(vecs[0], one) and parallel(vecs[1], f)) or (parallel(vecs[1], one) and parallel(vecs[0], f))):
                rep.violations.append("zero-eigenvalue eigenvectors must be the ones vector and f")
        if parallel(one, f):
            rep.violations.append("formation vector is parallel to the ones vector")
    elif isinstance(kind, CircularMotion):
        target = 1j * kind.b
        scale = 1.0 + max(abs(blk.eigenvalue) for blk in spec.blocks)
        rot = [i for i, blk in enumerate(spec.blocks) if abs(blk.eigenvalue - target) <= DISTINCT_RTOL * scale]
        if len(zero) != 1:
            rep.violations.append(f"expected exactly one zero eigenvalue, found {len(zero)}")
        elif not parallel(spec.blocks[zero[0]].chain[0], one):
            rep.violations.append("eigenvector of the zero eigenvalue is not the ones vector")
        if len(rot) != 1:
            rep.violations.append(f"expected exactly one eigenvalue {target}, found {len(rot)}")
        else:
            if spec.blocks[rot[0]].size > 1:
                rep.violations.append("the rotating eigenvalue must be simple")
            if not parallel(spec.blocks[rot[0]].chain[0], f):
                rep.violations.append("eigenvector of the rotating eigenvalue is not the formation vector")
        structural |= set(rot)
    else:
        raise TypeError(f"unknown spec kind {kind!r}")

    for i, blk in enumerate(spec.blocks):
        if i not in structural and not blk.eigenvalue.real < 0:
            rep.violations.append(f"eigenvalue {blk.eigenvalue} of block {i} does not have negative real part")
    return rep


def is_self_conjugate(spec: EigenSpec, tol: float = PAIRING_TOL) -> bool:
    """True iff blocks pair off under complex conjugation, chains included."""
    blocks = list(spec.blocks)
    scale = 1.0 + max((abs(b.eigenvalue) for b in blocks), default=0.0)
    vscale = 1.0 + max((numeric.max_abs(v) for b in blocks for v in b.chain), default=0.0)

    def conj_pair(p, q):
        if p.size != q.size or abs(p.eigenvalue - np.conj(q.eigenvalue)) > tol * scale:
            return False
        return all(numeric.max_abs(u - np.conj(w)) <= tol * vscale for u, w in zip(p.chain, q.chain))

    used = [False] * len(blocks)
    for i, blk in enumerate(blocks):
        if used[i]:
            continue
        used[i] = True
        if conj_pair(blk, blk):
            continue
        for j in range(i + 1, len(blocks)):
            if not used[j] and conj_pair(blk, blocks[j]):
                used[j] = True
                break
        else:
            return False
    return True


def is_controllable(sys: MultiAgentSystem) -> bool:
    """PBH test: rank [lambda I - A, B] = n at every eigenvalue of A."""
    n = sys.n
    for lam in np.linalg.eigvals(sys.A):
        M = np.hstack([lam * np.eye(n) - sys.A, sys.B])
        if numeric.rank(M) < n:
            return False
    return True
