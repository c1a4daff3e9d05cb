"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 verification failure, 3 diverged.
Diagnostics go to stderr; artifacts go to ``--out``.
"""

from __future__ import annotations

import argparse
import sys as _sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import formats, numeric
from .assign import roundtrip, synthesize
from .errors import Diverged, EigenformError
from .graph import DEFAULT_TAU_REL, extract_graph, has_spanning_tree, root_pairs, roots
from .hierarchy import Partition, balanced_partition, bench_compare, hierarchical_synthesize
from .model import CircularMotion, RigidFormation, ScalableFormation
from .motion import rigid_controller
from .sim import predict_limit, report, simulate_linear, simulate_rigid
from .topology import TopologyConstraint, constrain_zero, predict_absent_edges, verify_formation

EXIT_OK, EXIT_INPUT, EXIT_VERIFY, EXIT_DIVERGED = 0, 1, 2, 3


def _err(msg: str) -> None:
    print(f"eigenform: {msg}", file=_sys.stderr)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _tau(args, sc) -> float:
    if args.tau is not None:
        return args.tau
    return sc.tau_rel if sc is not None and sc.tau_rel is not None else DEFAULT_TAU_REL


def _eig_json(rep: numeric.EigReport, requested=None) -> dict:
    out = {"eigenvalues": formats.encode_vector(rep.eigenvalues),
           "eigenvectors": formats.encode_matrix(rep.right_eigenvectors),
           "residual": rep.residual}
    if requested is not None:
        out["requested_eigenvalues"] = formats.encode_vector(requested)
    return out


def _synth_scenario(sc, tau):
    """Synthesis (and constrained re-synthesis) for a scenario.

    Returns ``(F, closed_loop, eig_json, verified, failures)``.
    """
    spec, kind, _ = formats.resolve_spec(sc)
    res = synthesize(sc.system, spec, kind, tau_rel=tau)
    if sc.constraints:
        con = constrain_zero(sc.system, spec, res, TopologyConstraint(sc.constraints), tau)
        info = _eig_json(con.achieved, spec.eigenvalues)
        info.update(constrained=True, verified=con.verified, failures=con.failures,
                    noop_constraints=[[i + 1, j + 1] for i, j in con.noops],
                    original_F=formats.encode_matrix(res.F))
        return con.F, con.closed_loop, info, con.verified, con.failures
    rt = roundtrip(res)
    ok = rt.ok()
    failures = [] if ok else [f"round trip failed: {rt}"]
    if isinstance(kind, ScalableFormation) and sc.system.m == sc.system.n:
        fok, ff, _ = verify_formation(res.closed_loop, spec.formation)
        ok, failures = ok and fok, failures + ff
    info = _eig_json(res.achieved, spec.eigenvalues)
    info.update(constrained=False, verified=ok, failures=failures,
                eigenvalue_error=rt.eigenvalue_error, min_alignment=rt.min_alignment,
                chain_residual=rt.chain_residual)
    return res.F, res.closed_loop, info, ok, failures


def cmd_synth(args) -> int:
    sc = formats.load_scenario(args.scenario)
    tau = _tau(args, sc)
    F, closed, info, ok, failures = _synth_scenario(sc, tau)
    out = _out_dir(args)
    formats.write_matrix(out / "F.json", F)
    formats.write_matrix(out / "closed_loop.json", closed)
    formats.write_json(out / "eig_report.json", info)
    (out / "topology.dot").write_text(extract_graph(F, tau).to_dot())
    if not ok:
        _err("verification failed: " + "; ".join(failures))
        _err("achieved eigenvalues: " + ", ".join(f"{z:.6g}" for z in
                                                  (complex(*p) for p in info["eigenvalues"])))
        return EXIT_VERIFY
    return EXIT_OK


def cmd_topology(args) -> int:
    sc = formats.load_scenario(args.scenario)
    tau = _tau(args, sc)
    F, closed, info, ok, failures = _synth_scenario(sc, tau)
    g = extract_graph(F, tau)
    spec, _, _ = formats.resolve_spec(sc)
    n = g.n
    summary = {
        "n": n,
        "tau": g.tau,
        "edges": [[s + 1, d + 1] for s, d in sorted(g.edges)],
        "roots": sorted(r + 1 for r in roots(g)),
        "spanning_tree": has_spanning_tree(g),
        "two_root_pairs": [[p + 1, q + 1] for p, q in root_pairs(g)],
        "verified": ok,
    }
    if (not sc.constraints and spec.all_simple_chains and len(spec.zero_blocks()) == 1
            and sc.system.shape.name != "GENERAL_A_TALL_B"):
        pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        pred = predict_absent_edges(spec, pairs)
        mismatch = [[i + 1, j + 1] for (i, j), p in zip(pairs, pred)
                    if p != (abs(closed[i, j]) <= tau)]
        summary["predicted_absent"] = [[i + 1, j + 1] for (i, j), p in zip(pairs, pred) if p]
        summary["prediction_mismatches"] = mismatch
    out = _out_dir(args)
    (out / "topology.dot").write_text(g.to_dot())
    formats.write_json(out / "topology.json", summary)
    print(f"edges={len(g.edges)} roots={summary['roots']} spanning_tree={summary['spanning_tree']}")
    return EXIT_OK if ok else EXIT_VERIFY


def _initial_state(sc, args) -> np.ndarray:
    if sc.x0 is not None:
        return sc.x0
    seed = args.seed if args.seed is not None else sc.seed
    if seed is None:
        raise EigenformError("scenario needs 'x0' or a seed (--seed)")
    rng = np.random.default_rng(seed)
    n = sc.system.n
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def cmd_simulate(args) -> int:
    sc = formats.load_scenario(args.scenario)
    tau = _tau(args, sc)
    cfg = sc.sim
    if args.dt is not None:
        cfg = replace(cfg, dt=args.dt)
    if args.tmax is not None:
        cfg = replace(cfg, t_max=args.tmax)
    x0 = _initial_state(sc, args)
    spec, kind, leaders = formats.resolve_spec(sc)
    f = spec.formation
    extra = {}
    try:
        if isinstance(kind, RigidFormation):
            ctrl = rigid_controller(sc.system, f, kind.d, leaders=leaders, spec=spec)
            traj = simulate_rigid(ctrl, x0, cfg)
            rep = report(traj, f, cfg, with_translation=True)
            extra["target_distance"] = ctrl.target_distance
            p, q = ctrl.leader_pair
            extra["leader_distance"] = float(abs(traj.final[q] - traj.final[p]))
            extra["fitted_d"] = rep.size
        else:
            if sc.constraints:
                F, closed, _, _, _ = _synth_scenario(sc, tau)
            else:
                closed = synthesize(sc.system, spec, kind, tau_rel=tau).closed_loop
            if isinstance(kind, CircularMotion):
                basis = np.column_stack([np.ones(len(f)), f])
                traj = simulate_linear(closed, x0, cfg, subspace=basis)
                rep = report(traj, f, cfg, with_translation=True)
            else:
                traj = simulate_linear(closed, x0, cfg, subspace=f)
                rep = report(traj, f, cfg)
                if not sc.constraints and len(spec.zero_blocks()) == 1:
                    extra["predicted_limit"] = formats.encode_vector(predict_limit(spec, None, x0))
    except Diverged as exc:
        _err(f"simulation diverged: {exc}")
        return EXIT_DIVERGED
    out = _out_dir(args)
    (out / "trajectory.csv").write_text(formats.trajectory_csv(traj.times, traj.states, traj.formation_error))
    body = rep.to_dict()
    body.update(extra, dt=cfg.dt, t_max=cfg.t_max, x0=formats.encode_vector(x0),
                final_state=formats.encode_vector(traj.final))
    formats.write_json(out / "report.json", body)
    (out / "trajectory.svg").write_text(formats.trajectory_svg(traj.states, sc.name))
    print(f"converged={rep.converged} final_error={rep.final_error:.3e}")
    return EXIT_OK


def cmd_hierarchical(args) -> int:
    sc = formats.load_scenario(args.scenario)
    tau = _tau(args, sc)
    f = sc.formation
    part = Partition(sc.groups) if sc.groups is not None else balanced_partition(sc.system.n)
    res = hierarchical_synthesize(sc.system, f, part, sc.group_topology)
    out = _out_dir(args)
    formats.write_matrix(out / "F.json", res.F)
    formats.write_matrix(out / "closed_loop.json", res.closed_loop)
    info = _eig_json(numeric.eig(res.closed_loop))
    info.update(verified=res.verified, failures=res.failures,
                groups=[[i + 1 for i in g] for g in part.groups])
    formats.write_json(out / "eig_report.json", info)
    (out / "topology.dot").write_text(extract_graph(res.F, tau).to_dot())
    if not res.verified:
        _err("verification failed: " + "; ".join(res.failures))
        return EXIT_VERIFY
    return EXIT_OK


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    table = bench_compare(sizes, trials=args.trials, seed=args.seed if args.seed is not None else 0)
    out = _out_dir(args)
    (out / "bench.csv").write_text(table.to_csv())
    formats.write_json(out / "bench.json", {
        "seed": table.seed, "trials": table.trials,
        "rows": [{"n": r.n, "centralized_ms": r.centralized_ms, "hierarchical_ms": r.hierarchical_ms,
                  "ratio": r.ratio, "centralized_ok": r.centralized_ok,
                  "hierarchical_ok": r.hierarchical_ok,
                  "centralized_checksum": r.centralized_checksum,
                  "hierarchical_checksum": r.hierarchical_checksum} for r in table.rows],
    })
    print(table.to_csv(), end="")
    verdict = "strictly increasing" if table.ratio_increasing() else "NOT strictly increasing"
    print(f"ratio {verdict}")
    if not all(r.centralized_ok and r.hierarchical_ok for r in table.rows):
        _err("a synthesized gain failed verification")
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eigenform", description="Formation control by eigenstructure assignment.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scenario=True):
        if scenario:
            sp.add_argument("--scenario", required=True, help="scenario JSON file")
        sp.add_argument("--out", default="out", help="output directory (default: out)")
        sp.add_argument("--tau", type=float, default=None, help="relative zero threshold for F entries")
        sp.add_argument("--seed", type=int, default=None)

    sp = sub.add_parser("synth", help="synthesize F; writes F.json, closed_loop.json, eig_report.json, topology.dot")
    common(sp)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("topology", help="synthesize and analyze the communication graph")
    common(sp)
    sp.set_defaults(func=cmd_topology)

    sp = sub.add_parser("simulate", help="simulate the closed loop; writes trajectory.csv, report.json, trajectory.svg")
    common(sp)
    sp.add_argument("--dt", type=float, default=None)
    sp.add_argument("--tmax", type=float, default=None)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("hierarchical", help="two-level synthesis for a scenario with a 'formation'")
    common(sp)
    sp.set_defaults(func=cmd_hierarchical)

    sp = sub.add_parser("bench", help="time centralized vs hierarchical synthesis; writes bench.csv")
    common(sp, scenario=False)
    sp.add_argument("--sizes", default="100,200,400", help="comma-separated agent counts")
    sp.add_argument("--trials", type=int, default=3)
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors; ours is 1
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    try:
        return args.func(args)
    except EigenformError as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        _err(str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
