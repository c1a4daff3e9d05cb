"""Compute reference values independently of the package and freeze them.

Uses exact rational arithmetic (sympy) where the inputs are rational and
50-digit mpmath otherwise. Writes tests/data/oracles.json. Run from the repo
root:  python scripts/freeze_oracles.py
"""

from __future__ import annotations

import json
from pathlib import Path

import mpmath as mp
import sympy as sp

mp.mp.dps = 50
OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "oracles.json"


def cplx(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def cmat(M) -> list:
    return [[cplx(M[i, j]) for j in range(M.cols)] for i in range(M.rows)]


def exact_gain(a, b, lambdas, V):
    """F = W V^-1 with w_i = (lambda_i I - A) B^-1 v_i, A and B diagonal."""
    n = len(a)
    A, B = sp.diag(*a), sp.diag(*b)
    W = sp.zeros(n, n)
    for i, lam in enumerate(lambdas):
        W[:, i] = (lam * sp.eye(n) - A) * B.inv() * V[:, i]
    return W * V.inv()


def mp_gain(a, b, lambdas, V):
    n = len(a)
    A, B = mp.diag(a), mp.diag(b)
    W = mp.matrix(n, n)
    for i, lam in enumerate(lambdas):
        W[:, i] = (lam * mp.eye(n) - A) * mp.inverse(B) * V[:, i]
    return W * mp.inverse(V)


def mpmat(M) -> list:
    return [[cplx(complex(M[i, j])) for j in range(M.cols)] for i in range(M.rows)]


def consensus5():
    V = sp.Matrix([[1, 0, 0, 0, 0], [1, 1, 0, 0, 1], [1, 0, 1, 1, -1], [1, 0, 0, 1, 0], [1, 0, 1, 0, 1]])
    lam = [0, -1, -2, -3, -4]
    F = exact_gain([0] * 5, [1] * 5, lam, V)
    # constrained row 2 (index 1), forbidden column 4 (index 3)
    psi = V * sp.diag(*lam)  # B^-1 (V J - A V) with A = 0, B = I
    keep = [0, 1, 2, 4]
    Vhat_T = V.T[:, keep]
    row = (Vhat_T.T * Vhat_T).inv() * Vhat_T.T * psi[1, :].T
    Fhat = F.copy()
    Fhat[1, :] = sp.zeros(1, 5)
    for k, c in enumerate(keep):
        Fhat[1, c] = row[k]
    lam_hat = sorted((complex(r) for r in sp.Poly(Fhat.charpoly().as_expr()).nroots(n=30)),
                     key=lambda z: -z.real)
    return {
        "F": [[str(x) for x in F.row(i)] for i in range(5)],
        "Vinv_row1": [str(x) for x in V.inv().row(0)],
        "constrained_row": [str(x) for x in row],
        "constrained_eigenvalues": [z.real for z in lam_hat],
    }


def consensus4():
    f = sp.Matrix([1, sp.I, -1, -sp.I])
    V1 = sp.Matrix.hstack(f, sp.Matrix([1, 1, 0, 0]), sp.Matrix([0, 1, 1, 0]), sp.Matrix([0, 0, 1, 0]))
    F1 = exact_gain([0] * 4, [1] * 4, [0, -1, -2, -3], V1)
    one = sp.Matrix([1, 1, 1, 1])
    V2 = sp.Matrix.hstack(one, sp.Matrix([1, 1, 0, 1]), sp.Matrix([1, 0, 0, 1]), sp.Matrix([0, 0, 1, -1]))
    F2 = exact_gain([0] * 4, [1] * 4, [0, -1, -3, -4], V2)
    V2p = sp.Matrix.hstack(one, sp.Matrix([1, 1, 0, 1]), sp.Matrix([1, 0, 0, 1]),
                           sp.Matrix([0, 0, sp.Rational(1, 2), -1]))
    F2p = exact_gain([0] * 4, [1] * 4, [0, -2, -3, -4], V2p)
    # coupled A, B = I: w_i = (lambda_i I - A) v_i
    A = sp.Matrix([[0, sp.Rational(1, 2), 0, 0], [0, 0, 0, 0], [-sp.Rational(1, 2), 0, 0, 0], [0, 0, 2, 0]])
    W = sp.zeros(4, 4)
    for i, lam in enumerate([0, -1, -2, -3]):
        W[:, i] = (lam * sp.eye(4) - A) * V1[:, i]
    Fc = W * V1.inv()
    return {"F1": cmat(F1), "F2": cmat(F2), "F2_prime": cmat(F2p),
            "coupled_F": cmat(Fc), "coupled_closed_loop": cmat(A + Fc)}


def planar_motion():
    a = [mp.mpf(x) for x in ("1.6", "4.7", "3.0", "-0.7", "-4.2")]
    b = [mp.mpf(x) for x in ("0.2", "1.5", "-0.5", "-3.3", "-3.7")]
    f = [mp.expjpi(mp.mpf(2 * k) / 5) for k in range(1, 6)]
    V = mp.matrix(5, 5)
    cols = [f, [-1, 1, -2, -2, -2], [0, 0, -1, 0, 0], [0, 0, 1, -1, -2], [0, 0, 0, 0, 1]]
    for j, col in enumerate(cols):
        for i in range(5):
            V[i, j] = col[i]
    pent = mp_gain(a, b, [0, -1, -2, -3, -4], V)

    R = mp.matrix(5, 5)
    for i in range(5):
        R[i, 0] = 1
        R[i, 1] = f[i]
    for k, i in enumerate((2, 3, 4)):
        R[i, 2 + k] = 1
    rigid = mp_gain(a, b, [0, 0, -1, -2, -3], R)

    a6, b6 = a + [mp.mpf(0)], b + [mp.mpf(1)]
    C = mp.matrix(6, 6)
    for i in range(6):
        C[i, 0] = 1
        C[i, 1] = f[i] if i < 5 else 0
    for k, i in enumerate((1, 2, 3, 4)):
        C[i, 2 + k] = 1
    circ = mp_gain(a6, b6, [0, 1j, -1, -2, -3, -4], C)
    return {"pentagon_F": mpmat(pent), "rigid_F": mpmat(rigid), "circular_F": mpmat(circ),
            "rigid_target_distance_d5": float(5 * abs(f[1] - f[0]))}


def line3():
    # closed loop of the directed line on single integrators, f = [1, 2, 4]
    f = [1, 2, 4]
    F = sp.zeros(3, 3)
    for i in range(1, 3):
        F[i, i - 1] = sp.Rational(f[i], f[i - 1])
        F[i, i] = -1
    return {"F": [[str(x) for x in F.row(i)] for i in range(3)]}


def simo_line4():
    a1, a2, a3, h2, h3, b1, lam = sp.symbols("a1 a2 a3 h2 h3 b1 lam")
    A = sp.Matrix([[a1, 0, 0], [h2, a2, 0], [0, h3, a3]])
    B = sp.Matrix([b1, 0, 0])
    N1 = (A - lam * sp.eye(3)).LUsolve(B)
    vals = {a1: sp.Rational(3, 2), a2: -2, a3: sp.Rational(1, 2), h2: sp.Rational(7, 10),
            h3: -sp.Rational(6, 5), b1: sp.Rational(13, 10)}
    out = {"params": {"a": [1.5, -2.0, 0.5], "ahat": [0.7, -1.2], "b1": 1.3}}
    out["N1_at_minus1"] = [str(sp.nsimplify(x.subs(vals).subs(lam, -1))) for x in N1]
    out["generator"] = [str(sp.nsimplify(x.subs(vals).subs(lam, 0))) for x in N1]
    return out


def rk4_ratio():
    """Error ratio e(dt)/e(dt/2) against dt/8 for the pentagon closed loop, in 50 digits."""
    a = [mp.mpf(x) for x in ("1.6", "4.7", "3.0", "-0.7", "-4.2")]
    b = [mp.mpf(x) for x in ("0.2", "1.5", "-0.5", "-3.3", "-3.7")]
    f = [mp.expjpi(mp.mpf(2 * k) / 5) for k in range(1, 6)]
    V = mp.matrix(5, 5)
    cols = [f, [-1, 1, -2, -2, -2], [0, 0, -1, 0, 0], [0, 0, 1, -1, -2], [0, 0, 0, 0, 1]]
    for j, col in enumerate(cols):
        for i in range(5):
            V[i, j] = col[i]
    M = mp.diag(a) + mp.diag(b) * mp_gain(a, b, [0, -1, -2, -3, -4], V)
    x0 = mp.matrix([1 + 1j, 1 - 0.5j, 1, 1j, -1 + 1j])

    def run(h, steps):
        hM = h * M
        R = mp.eye(5) + hM + hM**2 / 2 + hM**3 / 6 + hM**4 / 24
        x = x0
        for _ in range(steps):
            x = R * x
        return x

    T, dt = 2, mp.mpf("0.05")
    n = int(T / dt)
    ref = run(dt / 8, 8 * n)
    e1 = mp.norm(run(dt, n) - ref)
    e2 = mp.norm(run(dt / 2, 2 * n) - ref)
    return {"dt": float(dt), "t_max": T, "ratio": float(e1 / e2)}


def main():
    data = {"consensus5": consensus5(), "consensus4": consensus4(), "planar_motion": planar_motion(),
            "line3": line3(), "simo_line4": simo_line4(), "rk4": rk4_ratio()}
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(data, indent=1) + "\n")
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
