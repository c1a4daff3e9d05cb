from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from eigenform import EigenSpec, MultiAgentSystem

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"
ORACLES = json.loads((Path(__file__).parent / "data" / "oracles.json").read_text())

PENTA_A = [1.6, 4.7, 3.0, -0.7, -4.2]
PENTA_B = [0.2, 1.5, -0.5, -3.3, -3.7]
PENTAGON = np.exp(2j * np.pi * np.arange(1, 6) / 5)
PENTA_X0 = np.array([1 + 1j, 1 - 0.5j, 1, 1j, -1 + 1j])
ENCIRCLE_X0 = np.array([1 - 0.5j, -2 + 2j, -2 + 1j, -1 + 1j, -1j, 1 + 1j])
EX2_V = np.array([[1, 0, 0, 0, 0], [1, 1, 0, 0, 1], [1, 0, 1, 1, -1], [1, 0, 0, 1, 0], [1, 0, 1, 0, 1]], float)


def frac_matrix(rows) -> np.ndarray:
    return np.array([[float(Fraction(x)) for x in row] for row in rows])


def cmatrix(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def pentagon_system() -> MultiAgentSystem:
    return MultiAgentSystem.from_agents(PENTA_A, PENTA_B)


def encircle_system() -> MultiAgentSystem:
    return MultiAgentSystem.from_agents(PENTA_A + [0.0], PENTA_B + [1.0])


def pentagon_spec() -> EigenSpec:
    V = np.column_stack([PENTAGON, [-1, 1, -2, -2, -2], [0, 0, -1, 0, 0], [0, 0, 1, -1, -2], [0, 0, 0, 0, 1]])
    return EigenSpec.from_columns([0, -1, -2, -3, -4], V)


def consensus5_spec() -> EigenSpec:
    return EigenSpec.from_columns([0, -1, -2, -3, -4], EX2_V)


def random_system(rng, n) -> MultiAgentSystem:
    a = rng.uniform(-3, 3, n)
    b = rng.uniform(0.5, 2.0, n) * rng.choice([-1.0, 1.0], n)
    return MultiAgentSystem.from_agents(a, b)


def random_formation(rng, n) -> np.ndarray:
    mag = rng.uniform(0.5, 2.0, n)
    return mag * np.exp(1j * rng.uniform(0, 2 * np.pi, n))


@pytest.fixture
def oracles():
    return ORACLES


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: dict[int, str] = {}


def verdict(k: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {k:2d} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
    ACCEPTANCE[k] = line
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
