"""File formats: complex JSON, scenario files, DOT, CSV, and SVG plots.

Complex numbers are always written as ``[re, im]``; on input a bare real
number is also accepted. Agent numbers in files are 1-based.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .errors import EigenformError, ParseError, SpecError
from .model import (
    CircularMotion,
    EigenSpec,
    JordanBlock,
    MultiAgentSystem,
    RigidFormation,
    ScalableFormation,
    SpecKind,
)
from .sim import SimConfig

# ----------------------------------------------------------------- complex JSON


def encode_complex(z) -> list:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_matrix(M) -> dict:
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return {"shape": list(M.shape),
            "data": [[encode_complex(z) for z in row] for row in M]}


def encode_vector(v) -> list:
    return [encode_complex(z) for z in np.asarray(v, dtype=complex).reshape(-1)]


def decode_complex(obj, where: str = "value") -> complex:
    if isinstance(obj, bool):
        raise ParseError(where, "expected a number or [re, im]")
    if isinstance(obj, (int, float)):
        return complex(float(obj), 0.0)
    if (isinstance(obj, list) and len(obj) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj)):
        return complex(float(obj[0]), float(obj[1]))
    raise ParseError(where, f"expected a number or [re, im], got {json.dumps(obj)}")


def decode_real(obj, where: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise ParseError(where, f"expected a real number, got {json.dumps(obj)}")
    return float(obj)


def decode_vector(obj, where: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise ParseError(where, "expected a nonempty list")
    return np.array([decode_complex(z, f"{where}[{k}]") for k, z in enumerate(obj)], dtype=complex)


def decode_matrix(obj, where: str, real: bool = False) -> np.ndarray:
    """Nested rows, or the ``{"shape", "data"}`` form written by ``encode_matrix``."""
    if isinstance(obj, dict):
        if "data" not in obj:
            raise ParseError(where, "matrix object needs a 'data' field")
        M = decode_matrix(obj["data"], f"{where}.data", real)
        if "shape" in obj and list(M.shape) != list(obj["shape"]):
            raise ParseError(f"{where}.shape", f"declared {obj['shape']} but data is {list(M.shape)}")
        return M
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ParseError(where, "expected a nonempty list of rows")
    width = len(obj[0])
    rows = []
    for i, row in enumerate(obj):
        if len(row) != width:
            raise ParseError(f"{where}[{i}]", f"row has {len(row)} entries, expected {width}")
        if real:
            rows.append([decode_real(x, f"{where}[{i}][{j}]") for j, x in enumerate(row)])
        else:
            rows.append([decode_complex(x, f"{where}[{i}][{j}]") for j, x in enumerate(row)])
    return np.array(rows, dtype=float if real else complex)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def write_matrix(path, M) -> None:
    write_json(path, encode_matrix(M))


def read_matrix(path) -> np.ndarray:
    return decode_matrix(load_json(path), Path(path).name)


def load_json(path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}", exc.msg) from None


# ----------------------------------------------------------- systems and specs


def parse_system(obj, where: str = "system") -> MultiAgentSystem:
    if not isinstance(obj, dict):
        raise ParseError(where, "expected an object")
    if "agents" in obj:
        agents = obj["agents"]
        if not isinstance(agents, list) or not agents:
            raise ParseError(f"{where}.agents", "expected a nonempty list")
        a, b = [], []
        for k, ag in enumerate(agents):
            here = f"{where}.agents[{k}]"
            if not isinstance(ag, dict) or "a" not in ag or "b" not in ag:
                raise ParseError(here, "expected an object with 'a' and 'b'")
            a.append(decode_real(ag["a"], f"{here}.a"))
            b.append(decode_real(ag["b"], f"{here}.b"))
        try:
            return MultiAgentSystem.from_agents(a, b)
        except EigenformError as exc:
            raise ParseError(f"{where}.agents", str(exc)) from None
    for key in ("A", "B"):
        if key not in obj:
            raise ParseError(where, f"missing '{key}' (or use the 'agents' shorthand)")
    A = decode_matrix(obj["A"], f"{where}.A", real=True)
    B = obj["B"]
    if isinstance(B, list) and B and not isinstance(B[0], list):
        B = [[x] for x in B]  # single column written as a flat list
    B = decode_matrix(B, f"{where}.B", real=True)
    try:
        return MultiAgentSystem(A, B)
    except (EigenformError, ValueError) as exc:
        raise ParseError(where, str(exc)) from None


def encode_system(sys: MultiAgentSystem) -> dict:
    return {"A": sys.A.tolist(), "B": sys.B.tolist()}


def parse_spec(obj, where: str = "spec") -> EigenSpec:
    """Either ``eigenvalues`` + ``eigenvectors`` (rows of V) or ``blocks``."""
    if not isinstance(obj, dict):
        raise ParseError(where, "expected an object")
    formation = decode_vector(obj["formation"], f"{where}.formation") if "formation" in obj else None
    try:
        if "blocks" in obj:
            blocks = []
            if not isinstance(obj["blocks"], list) or not obj["blocks"]:
                raise ParseError(f"{where}.blocks", "expected a nonempty list")
            for k, blk in enumerate(obj["blocks"]):
                here = f"{where}.blocks[{k}]"
                if not isinstance(blk, dict) or "eigenvalue" not in blk or "chain" not in blk:
                    raise ParseError(here, "expected an object with 'eigenvalue' and 'chain'")
                lam = decode_complex(blk["eigenvalue"], f"{here}.eigenvalue")
                chain = blk["chain"]
                if not isinstance(chain, list) or not chain:
                    raise ParseError(f"{here}.chain", "expected a nonempty list of vectors")
                vecs = [decode_vector(v, f"{here}.chain[{j}]") for j, v in enumerate(chain)]
                blocks.append(JordanBlock(lam, vecs))
            if formation is None:
                zero = [b for b in blocks if b.eigenvalue == 0]
                formation = zero[0].chain[0] if zero else blocks[0].chain[0]
            return EigenSpec(blocks, formation)
        for key in ("eigenvalues", "eigenvectors"):
            if key not in obj:
                raise ParseError(where, f"missing '{key}' (or give 'blocks')")
        lam = decode_vector(obj["eigenvalues"], f"{where}.eigenvalues")
        V = decode_matrix(obj["eigenvectors"], f"{where}.eigenvectors")
        if V.shape != (len(lam), len(lam)):
            raise ParseError(f"{where}.eigenvectors",
                             f"expected a {len(lam)}x{len(lam)} matrix, got {V.shape[0]}x{V.shape[1]}")
        return EigenSpec.from_columns(lam, V, formation)
    except (SpecError, ValueError) as exc:
        raise ParseError(where, str(exc)) from None


def encode_spec(spec: EigenSpec) -> dict:
    return {
        "blocks": [{"eigenvalue": encode_complex(b.eigenvalue),
                    "chain": [encode_vector(v) for v in b.chain]} for b in spec.blocks],
        "formation": encode_vector(spec.formation),
    }


# ------------------------------------------------------------------- scenarios

GENERATORS = ("star", "cyclic", "line", "rigid", "circular", "simo")


@dataclass
class Scenario:
    """A parsed scenario file; indices are 0-based from here on."""

    name: str
    system: MultiAgentSystem
    spec: EigenSpec | None = None
    kind: SpecKind = field(default_factory=ScalableFormation)
    generator: dict | None = None
    leaders: tuple | None = None
    constraints: list = field(default_factory=list)
    sim: SimConfig = field(default_factory=SimConfig)
    x0: np.ndarray | None = None
    seed: int | None = None
    tau_rel: float | None = None
    groups: list | None = None
    group_topology: str = "star"

    @property
    def formation(self) -> np.ndarray:
        if self.spec is not None:
            return self.spec.formation
        return self.generator["f"]


def _agent_index(obj, n: int, where: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise ParseError(where, "expected a 1-based agent number")
    if not 1 <= obj <= n:
        raise ParseError(where, f"agent {obj} out of range 1..{n}")
    return obj - 1


def _pair(obj, n: int, where: str) -> tuple[int, int]:
    if not isinstance(obj, list) or len(obj) != 2:
        raise ParseError(where, "expected a pair [i, j]")
    return _agent_index(obj[0], n, f"{where}[0]"), _agent_index(obj[1], n, f"{where}[1]")


def _parse_kind(obj, n: int, where: str) -> tuple[SpecKind, tuple | None]:
    if isinstance(obj, str):
        obj = {"type": obj}
    if not isinstance(obj, dict) or "type" not in obj:
        raise ParseError(where, "expected an object with 'type'")
    t = obj["type"]
    try:
        if t == "scalable":
            return ScalableFormation(), None
        if t == "rigid":
            leaders = _pair(obj["leaders"], n, f"{where}.leaders") if "leaders" in obj else None
            return RigidFormation(decode_real(obj.get("d"), f"{where}.d")), leaders
        if t == "circular":
            return CircularMotion(decode_real(obj.get("b"), f"{where}.b")), None
    except SpecError as exc:
        raise ParseError(where, str(exc)) from None
    raise ParseError(f"{where}.type", f"unknown kind {t!r}")


def _parse_generator(obj, n: int, where: str) -> dict:
    if not isinstance(obj, dict) or "type" not in obj:
        raise ParseError(where, "expected an object with 'type'")
    t = obj["type"]
    if t not in GENERATORS:
        raise ParseError(f"{where}.type", f"unknown generator {t!r}; expected one of {', '.join(GENERATORS)}")
    gen = {"type": t}
    if t != "simo" or "f" in obj:
        if "f" not in obj:
            raise ParseError(where, "missing formation 'f'")
        gen["f"] = decode_vector(obj["f"], f"{where}.f")
        if len(gen["f"]) != n:
            raise ParseError(f"{where}.f", f"has {len(gen['f'])} entries, system has {n} agents")
    if "lambdas" in obj:
        gen["lambdas"] = decode_vector(obj["lambdas"], f"{where}.lambdas")
    elif t in ("star", "simo"):
        gen["lambdas"] = -np.arange(1, n, dtype=float).astype(complex)
    if t == "star":
        gen["root"] = _agent_index(obj.get("root", 1), n, f"{where}.root")
    if t == "rigid":
        gen["d"] = decode_real(obj.get("d"), f"{where}.d")
        gen["leaders"] = _pair(obj["leaders"], n, f"{where}.leaders") if "leaders" in obj else None
    if t == "circular":
        gen["b"] = decode_real(obj.get("b"), f"{where}.b")
        gen["anchors"] = _pair(obj["anchors"], n, f"{where}.anchors") if "anchors" in obj else None
    if t == "simo":
        gen["scale"] = decode_complex(obj.get("scale", 1.0), f"{where}.scale")
    return gen


def build_generator_spec(sys: MultiAgentSystem, gen: dict) -> tuple[EigenSpec, SpecKind, tuple | None]:
    from . import motion, topology

    t = gen["type"]
    if t == "star":
        return topology.star_spec(sys, gen["f"], gen["lambdas"], gen["root"]), ScalableFormation(), None
    if t == "cyclic":
        return topology.cyclic_spec(sys, gen["f"]), ScalableFormation(), None
    if t == "line":
        return topology.line_spec(sys, gen["f"]), ScalableFormation(), None
    if t == "rigid":
        spec = motion.rigid_spec(sys, gen["f"], gen.get("lambdas"), gen["leaders"])
        return spec, RigidFormation(gen["d"]), gen["leaders"]
    if t == "circular":
        spec = motion.circular_spec(sys, gen["f"], gen["b"], gen.get("lambdas"), gen["anchors"])
        return spec, CircularMotion(gen["b"]), None
    f = gen.get("f")
    if f is None:
        f = gen["scale"] * topology.simo_line_formation_set(sys)
    return topology.single_input_spec(sys, f, gen["lambdas"]), ScalableFormation(), None


_SIM_FIELDS = {f.name for f in fields(SimConfig)}


def parse_scenario_obj(obj, name: str = "scenario") -> Scenario:
    if not isinstance(obj, dict):
        raise ParseError("(root)", "expected a JSON object")
    if "system" not in obj:
        raise ParseError("(root)", "missing 'system'")
    sys = parse_system(obj["system"])
    n = sys.n
    sc = Scenario(name=str(obj.get("name", name)), system=sys)

    if "spec" in obj and "generator" in obj:
        raise ParseError("(root)", "give either 'spec' or 'generator', not both")
    if "spec" in obj:
        sc.spec = parse_spec(obj["spec"])
        if sc.spec.n != n:
            raise ParseError("spec", f"spec has dimension {sc.spec.n}, system has {n} agents")
        if "kind" in obj:
            sc.kind, sc.leaders = _parse_kind(obj["kind"], n, "kind")
    elif "generator" in obj:
        sc.generator = _parse_generator(obj["generator"], n, "generator")
    elif "formation" in obj:
        # hierarchical scenarios only need the target formation
        f = decode_vector(obj["formation"], "formation")
        if len(f) != n:
            raise ParseError("formation", f"has {len(f)} entries, system has {n} agents")
        sc.generator = {"type": "formation", "f": f}
    else:
        raise ParseError("(root)", "missing 'spec', 'generator', or 'formation'")

    cons = obj.get("constraints", [])
    if not isinstance(cons, list):
        raise ParseError("constraints", "expected a list of [i, j] pairs")
    for k, c in enumerate(cons):
        i, j = _pair(c, n, f"constraints[{k}]")
        if i == j:
            raise ParseError(f"constraints[{k}]", "diagonal entries cannot be forbidden")
        sc.constraints.append((i, j))

    if "sim" in obj:
        sim = obj["sim"]
        if not isinstance(sim, dict):
            raise ParseError("sim", "expected an object")
        unknown = set(sim) - _SIM_FIELDS
        if unknown:
            raise ParseError("sim", f"unknown fields {sorted(unknown)}")
        try:
            sc.sim = replace(sc.sim, **sim)
        except (TypeError, ValueError) as exc:
            raise ParseError("sim", str(exc)) from None

    if "x0" in obj:
        sc.x0 = decode_vector(obj["x0"], "x0")
        if len(sc.x0) != n:
            raise ParseError("x0", f"has {len(sc.x0)} entries, system has {n} agents")
    if "seed" in obj:
        if isinstance(obj["seed"], bool) or not isinstance(obj["seed"], int):
            raise ParseError("seed", "expected an integer")
        sc.seed = obj["seed"]
    if "tau" in obj:
        sc.tau_rel = decode_real(obj["tau"], "tau")
    if "groups" in obj:
        groups = obj["groups"]
        if not isinstance(groups, list) or not groups:
            raise ParseError("groups", "expected a nonempty list of agent lists")
        sc.groups = [[_agent_index(a, n, f"groups[{g}][{k}]") for k, a in enumerate(grp)]
                     for g, grp in enumerate(groups) if isinstance(grp, list)]
        if len(sc.groups) != len(groups):
            raise ParseError("groups", "every group must be a list of agent numbers")
    if "group_topology" in obj:
        if obj["group_topology"] not in ("star", "line"):
            raise ParseError("group_topology", "expected 'star' or 'line'")
        sc.group_topology = obj["group_topology"]
    return sc


def load_scenario(path) -> Scenario:
    path = Path(path)
    return parse_scenario_obj(load_json(path), name=path.stem)


def resolve_spec(sc: Scenario) -> tuple[EigenSpec, SpecKind, tuple | None]:
    """Spec, kind and leader pair of a scenario, running its generator if needed."""
    if sc.spec is not None:
        return sc.spec, sc.kind, sc.leaders
    if sc.generator is None or sc.generator["type"] == "formation":
        raise SpecError("scenario has no spec or generator")
    return build_generator_spec(sc.system, sc.generator)


# ------------------------------------------------------------------ CSV / SVG


def trajectory_csv(times, states, errors) -> str:
    states = np.atleast_2d(states)
    n = states.shape[1]
    head = ["t"] + [f"x{k}_{p}" for k in range(1, n + 1) for p in ("re", "im")] + ["err"]
    lines = [",".join(head)]
    for t, x, e in zip(times, states, errors):
        vals = [t] + [v for z in x for v in (z.real, z.imag)] + [e]
        lines.append(",".join("%.17g" % v for v in vals))
    return "\n".join(lines) + "\n"


def read_trajectory_csv(text: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows = [line.split(",") for line in text.strip().splitlines()[1:]]
    data = np.array(rows, dtype=float)
    states = data[:, 1:-1:2] + 1j * data[:, 2:-1:2]
    return data[:, 0], states, data[:, -1]


CANVAS = 800
MARGIN = 40
_COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


@dataclass(frozen=True)
class PlotTransform:
    """``px = MARGIN + scale (re - re_min)``, ``py = CANVAS - MARGIN - scale (im - im_min)``."""

    re_min: float
    im_min: float
    scale: float

    def __call__(self, z: complex) -> tuple[float, float]:
        return (MARGIN + self.scale * (z.real - self.re_min),
                CANVAS - MARGIN - self.scale * (z.imag - self.im_min))


def plot_transform(states) -> PlotTransform:
    pts = np.asarray(states).reshape(-1)
    re_min, re_max = float(pts.real.min()), float(pts.real.max())
    im_min, im_max = float(pts.imag.min()), float(pts.imag.max())
    span = max(re_max - re_min, im_max - im_min, 1e-12)
    scale = (CANVAS - 2 * MARGIN) / span
    # center the shorter axis
    re_min -= ((span - (re_max - re_min)) / 2)
    im_min -= ((span - (im_max - im_min)) / 2)
    return PlotTransform(re_min, im_min, scale)


def trajectory_svg(states, title: str = "") -> str:
    """Paths as polylines, x at the initial and o at the final positions."""
    states = np.atleast_2d(states)
    tr = plot_transform(states)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" '
           f'viewBox="0 0 {CANVAS} {CANVAS}" data-re-min="{tr.re_min!r}" '
           f'data-im-min="{tr.im_min!r}" data-scale="{tr.scale!r}" data-margin="{MARGIN}">',
           f'<rect width="{CANVAS}" height="{CANVAS}" fill="white"/>']
    if title:
        out.append(f'<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="16">{title}</text>')
    ox, oy = tr(0j)
    out.append(f'<line x1="{MARGIN}" y1="{oy:.3f}" x2="{CANVAS - MARGIN}" y2="{oy:.3f}" stroke="#ccc"/>')
    out.append(f'<line x1="{ox:.3f}" y1="{MARGIN}" x2="{ox:.3f}" y2="{CANVAS - MARGIN}" stroke="#ccc"/>')
    for k in range(states.shape[1]):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join("%.3f,%.3f" % tr(z) for z in states[:, k])
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1"/>')
        x, y = tr(states[0, k])
        out.append(f'<path d="M{x - 5:.3f},{y - 5:.3f}L{x + 5:.3f},{y + 5:.3f}'
                   f'M{x - 5:.3f},{y + 5:.3f}L{x + 5:.3f},{y - 5:.3f}" stroke="{color}" stroke-width="2"/>')
        x, y = tr(states[-1, k])
        out.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="6" fill="none" stroke="{color}" stroke-width="2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
