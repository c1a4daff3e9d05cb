"""Fixed-step RK4 simulation of closed-loop formations and convergence metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import numeric
from .errors import Diverged, NotSimpleZero, SpecError
from .model import DISTINCT_RTOL, EigenSpec
from .motion import RigidController, rigid_rhs

COLLISION_DISTANCE = 1e-9


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    t_max: float = 30.0
    record_every: int = 10
    convergence_tol: float = 1e-6
    convergence_window: int = 5
    divergence_bound: float = 1e12

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_max >= self.dt:
            raise ValueError("t_max must be at least dt")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")
        if self.convergence_window < 1 or self.record_every < 1:
            raise ValueError("convergence_window and record_every must be >= 1")

    @property
    def steps(self) -> int:
        return int(round(self.t_max / self.dt))


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # one row per sample
    formation_error: np.ndarray
    limit_estimate: np.ndarray | None
    converged: bool
    time_to_converge: float | None
    basis: np.ndarray = field(repr=False)
    leader_collision: bool = False

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


@dataclass
class ConvergenceReport:
    converged: bool
    c: complex
    c_prime: complex
    theta: float
    size: float
    final_error: float
    time_to_converge: float | None
    tol: float
    window: int
    leader_collision: bool = False

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "c": [self.c.real, self.c.imag],
            "c_prime": [self.c_prime.real, self.c_prime.imag],
            "theta": self.theta,
            "size": self.size,
            "final_error": self.final_error,
            "time_to_converge": self.time_to_converge,
            "convergence_tol": self.tol,
            "convergence_window": self.window,
            "leader_collision": self.leader_collision,
        }


def orthonormal_basis(subspace) -> np.ndarray:
    S = np.asarray(subspace, dtype=complex)
    if S.ndim == 1:
        S = S[:, None]
    Q, _ = np.linalg.qr(S)
    return Q


def projection_error(Q: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Distance of each row of X to span(Q)."""
    X = np.atleast_2d(X)
    R = X - (X @ Q.conj()) @ Q.T
    return np.linalg.norm(R, axis=1)


def rk4(rhs: Callable, x0, cfg: SimConfig, watch: Callable | None = None):
    """Classical fourth-order Runge-Kutta with fixed step.

    Returns ``(times, states)`` sampled every ``cfg.record_every`` steps (the
    initial and final states are always included). ``watch(x)`` is called
    after every step.
    """
    x = numeric.as_cvector(x0).copy()
    h = cfg.dt
    steps = cfg.steps
    times, states = [0.0], [x.copy()]
    for k in range(1, steps + 1):
        t = (k - 1) * h
        k1 = rhs(x, t)
        k2 = rhs(x + 0.5 * h * k1, t + 0.5 * h)
        k3 = rhs(x + 0.5 * h * k2, t + 0.5 * h)
        k4 = rhs(x + h * k3, t + h)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if watch is not None:
            watch(x)
        if k % cfg.record_every == 0 or k == steps:
            norm = float(np.linalg.norm(x))
            if not np.isfinite(norm) or norm > cfg.divergence_bound:
                raise Diverged(k * h, norm)
            times.append(k * h)
            states.append(x.copy())
    return np.asarray(times), np.asarray(states)


def _converge(times, err, cfg) -> tuple[bool, float | None]:
    run = 0
    for idx, e in enumerate(err):
        run = run + 1 if e < cfg.convergence_tol else 0
        if run >= cfg.convergence_window:
            # converged only if it stays converged to the end
            if np.all(err[idx - run + 1:] < cfg.convergence_tol):
                return True, float(times[idx - run + 1])
            run = 0
    return False, None


def _trajectory(times, states, basis, cfg, collision=False) -> Trajectory:
    Q = orthonormal_basis(basis)
    err = projection_error(Q, states)
    converged, t_conv = _converge(times, err, cfg)
    return Trajectory(times=times, states=states, formation_error=err,
                      limit_estimate=states[-1].copy() if converged else None,
                      converged=converged, time_to_converge=t_conv, basis=Q,
                      leader_collision=collision)


def kernel_subspace(closed_loop, rtol: float = 1e-8) -> np.ndarray:
    M = numeric.as_cmatrix(closed_loop)
    return numeric.nullspace(M, tol=rtol * max(1.0, numeric.max_abs(M)))


def simulate_linear(closed_loop, x0, cfg: SimConfig = SimConfig(), subspace=None) -> Trajectory:
    """Integrate ``x' = M x``; formation error is the distance to ``subspace``
    (default: the kernel of M, i.e. span{f} for a single-formation loop)."""
    M = numeric.as_cmatrix(closed_loop)
    x0 = numeric.as_cvector(x0)
    if M.shape != (len(x0), len(x0)):
        raise SpecError(f"closed loop {M.shape} does not match state of length {len(x0)}")
    basis = kernel_subspace(M) if subspace is None else subspace
    times, states = rk4(lambda x, t: M @ x, x0, cfg)
    return _trajectory(times, states, basis, cfg)


def simulate_rigid(ctrl: RigidController, x0, cfg: SimConfig = SimConfig()) -> Trajectory:
    x0 = numeric.as_cvector(x0)
    p, q = ctrl.leader_pair
    if x0[p] == x0[q]:
        raise SpecError("leader pair must start at distinct positions")
    hit = [False]

    def watch(x):
        if abs(x[q] - x[p]) < COLLISION_DISTANCE:
            hit[0] = True

    times, states = rk4(lambda x, t: rigid_rhs(ctrl, x, t), x0, cfg, watch)
    basis = np.column_stack([np.ones(len(x0)), ctrl.f])
    return _trajectory(times, states, basis, cfg, collision=hit[0])


def fit_formation(x, f, with_translation: bool = True) -> tuple[complex, complex, float]:
    """Least-squares ``x ~ c 1 + c' f`` (or ``x ~ c' f``); returns ``(c, c', residual)``."""
    x = numeric.as_cvector(x)
    f = numeric.as_cvector(f)
    cols = [np.ones(len(x)), f] if with_translation else [f]
    coef, *_ = np.linalg.lstsq(np.column_stack(cols).astype(complex), x, rcond=None)
    resid = float(np.linalg.norm(np.column_stack(cols) @ coef - x))
    if with_translation:
        return complex(coef[0]), complex(coef[1]), resid
    return 0j, complex(coef[0]), resid


def report(traj: Trajectory, f, cfg: SimConfig, with_translation: bool = False) -> ConvergenceReport:
    c, cp, _ = fit_formation(traj.final, f, with_translation)
    if not with_translation:
        c, cp = cp, 0j  # scalable formation: x -> c f
        size = abs(c)
        theta = float(np.angle(c))
    else:
        size = abs(cp)
        theta = float(np.angle(cp))
    return ConvergenceReport(converged=traj.converged, c=c, c_prime=cp, theta=theta, size=size,
                             final_error=float(traj.formation_error[-1]),
                             time_to_converge=traj.time_to_converge,
                             tol=cfg.convergence_tol, window=cfg.convergence_window,
                             leader_collision=traj.leader_collision)


def _zero_block(spec: EigenSpec) -> int:
    zero = spec.zero_blocks()
    if len(zero) != 1 or spec.blocks[zero[0]].size != 1:
        raise NotSimpleZero("spec does not have a simple zero eigenvalue")
    return zero[0]


def left_eigenvectors(spec: EigenSpec) -> np.ndarray:
    """Rows of ``V^{-1}``; row k pairs with column k of ``V``."""
    return numeric.inv(spec.V)


def predict_limit(spec: EigenSpec, result, x0) -> np.ndarray:
    """``(w^T x0) f`` with ``w`` the zero-eigenvalue row of ``V^{-1}``.

    ``result`` may be None; if given it must come from a spec of the same size.
    """
    if result is not None and result.spec.n != spec.n:
        raise SpecError("synthesis result does not match the spec dimension")
    b = _zero_block(spec)
    col = sum(blk.size for blk in spec.blocks[:b])
    w = numeric.inv(spec.V)[col]
    f = spec.blocks[b].chain[0]
    return (w @ numeric.as_cvector(x0)) * f


def modal_coefficients(spec: EigenSpec, states, eigenvalue: complex) -> np.ndarray:
    """Coefficient of the eigenvector at ``eigenvalue`` in each state, i.e.
    the projection along all other eigen-directions (``w^T x(t)``)."""
    lam = spec.eigenvalues
    scale = 1.0 + float(np.max(np.abs(lam)))
    hits = np.flatnonzero(np.abs(lam - eigenvalue) <= DISTINCT_RTOL * scale)
    if hits.size != 1:
        raise SpecError(f"eigenvalue {eigenvalue} is not simple in the spec")
    w = left_eigenvectors(spec)[hits[0]]
    return np.atleast_2d(states) @ w


def transient_cutoff(spec: EigenSpec, factor: float = 5.0) -> float:
    """``factor / |Re lambda|`` for the slowest strictly stable eigenvalue."""
    re = spec.eigenvalues.real
    stable = re[re < 0]
    if not stable.size:
        return 0.0
    return factor / abs(float(np.max(stable)))
