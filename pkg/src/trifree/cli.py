"""Command line entry point: ``trifree <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from pathlib import Path

from . import checks, harness
from .process import RunConfig, advance, new_state, read_graph
from .structures import StructureParseError, StructureTooLarge, parse_structure
from .trajectory import Params


def _common(p: argparse.ArgumentParser, seed: bool = True) -> None:
    p.add_argument("--n", type=int, required=True)
    if seed:
        p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--big-c", type=float, default=20.0)
    p.add_argument("--omega", type=float, default=None)


def _run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--record-every", type=int, default=None)
    p.add_argument("--instrumentation", choices=["light", "full"], default="light")
    p.add_argument("--until-t", type=float, default=None)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--sample-size", type=int, default=4096)


def _config(a, seeds, jobs=1) -> harness.ExperimentConfig:
    return harness.ExperimentConfig(
        n=a.n, seeds=tuple(seeds), eps=a.eps, big_c=a.big_c, omega=a.omega,
        record_every=a.record_every, instrumentation=a.instrumentation, until_t=a.until_t,
        max_steps=a.max_steps, sample_size=a.sample_size, out=a.out, jobs=jobs)


def cmd_simulate(a) -> int:
    cfg = _config(a, [a.seed])
    out = Path(a.out)
    stem = out.with_suffix("")
    snap = a.snapshot or f"{stem}.snapshot.jsonl"
    summ = a.summary or f"{stem}.summary.json"
    info = harness.simulate(cfg, out, snap, summ, a.resume)
    print(json.dumps(info))
    return 0


def cmd_ensemble(a) -> int:
    seeds = range(a.seed, a.seed + a.runs)
    info = harness.ensemble(_config(a, seeds, a.jobs), a.out)
    print(f"{len(info['runs'])} runs written to {a.out}; aggregate: {info['aggregate']}")
    return 0


def cmd_structure(a) -> int:
    text = sys.stdin.read() if a.file == "-" else Path(a.file).read_text()
    pair = parse_structure(text)
    fams = tuple(a.families) if a.families else ()
    rep = harness.structure_report(pair, Params(n=a.n, eps=a.eps, big_c=a.big_c, omega=a.omega), fams)
    print(harness.format_structure_report(rep))
    if a.json:
        Path(a.json).write_text(json.dumps(rep, indent=2) + "\n")
    return 0


def cmd_ygraph(a) -> int:
    from .ygraph import build, u_walks, v_average

    cfg = RunConfig(n=a.n, seed=a.seed, max_steps=a.max_steps, until_t=a.until_t)
    st = new_state(cfg)
    advance(st, cfg.stop_m)
    yg = build(st)
    if a.edge:
        edges = [tuple(int(x) for x in e.split("-")) for e in a.edge]
    else:
        rnd = random.Random(a.seed)
        edges = rnd.sample(yg.pairs, min(a.sample, len(yg.pairs)))
    lines = ["edge,sigma,U,V"]
    for u, v in edges:
        for sg in a.sigma:
            cnt = u_walks(yg, (u, v), u, sg)
            val = "%.9g" % v_average(yg, (u, v), u, sg) if cnt else "nan"
            lines.append(f"{u}-{v},{sg},{cnt},{val}")
    text = "\n".join(lines) + "\n"
    if a.out:
        Path(a.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_witness(a) -> int:
    from .analysis import ramsey_witness

    cert = ramsey_witness(RunConfig(n=a.n, seed=a.seed), guard=a.guard, node_limit=a.node_limit,
                          heuristic_budget=a.heuristic_budget)
    stem = Path(a.out).with_suffix("")
    Path(a.out).write_text(cert.to_json() + "\n")
    graph_path = a.graph or f"{stem}.graph.txt"
    body = [f"{cert.n} {len(cert.edges)}"] + [f"{u} {v}" for u, v in cert.edges]
    Path(graph_path).write_text("\n".join(body) + "\n")
    label = cert.claim or f"alpha >= {cert.alpha_value} ({cert.alpha_kind})"
    print(f"n={cert.n} seed={cert.seed} edges={len(cert.edges)} max_deg={cert.max_degree} {label}")
    return 0


def _suites(quick: bool):
    sizes = [10, 20, 30] if quick else [20, 40, 60]
    seeds = range(5) if quick else range(50)

    def oracle_and_identities():
        audits = [checks.audit_run(n, s) for n in sizes for s in seeds]
        return ([f"oracle equivalence: {x}" for a in audits for x in a.oracle]
                + [f"dQ = -(Y_e + 1): {x}" for a in audits for x in a.delta_q]
                + [f"dYY = X_e - 2 sum Y_f: {x}" for a in audits for x in a.delta_ybb])

    ysizes = [12, 20, 30] if quick else [30, 60, 100, 150, 200]
    yseeds = range(4) if quick else range(5)
    return [
        ("oracle+identities", oracle_and_identities),
        ("ygraph", lambda: [f"ygraph structure: {x}" for n in ysizes for s in yseeds
                            for x in checks.ygraph_structure(n, s)]),
        ("endpoints", lambda: [f"endpoint sets: {x}" for x in checks.endpoint_sets(range(100 if quick else 1000))]),
        ("building-sequence", lambda: [f"building sequence: {x}"
                                       for x in checks.building_sequences(40 if quick else 200)]),
        ("walks", lambda: [f"walk DP: {x}" for x in checks.walk_counts(5 if quick else 20)]),
    ]


def cmd_verify(a) -> int:
    failed = 0
    for name, fn in _suites(a.quick):
        t0 = time.perf_counter()
        bad = fn()
        dt = time.perf_counter() - t0
        print(f"{'PASS' if not bad else 'FAIL'} {name:<20} {dt:8.2f}s")
        for line in bad[:10]:
            print(f"    {line}")
        failed += bool(bad)
    print("verify: all checks passed" if not failed else f"verify: {failed} check(s) failed")
    return 1 if failed else 0


def cmd_replay(a) -> int:
    """Re-verify an exported graph; exit 0 iff it is maximal triangle-free."""
    import numpy as np

    from .process import is_maximal_triangle_free

    n, edges = read_graph(a.file)
    A = np.zeros((n, n), dtype=bool)
    A[edges[:, 0], edges[:, 1]] = A[edges[:, 1], edges[:, 0]] = True
    ok = is_maximal_triangle_free(A)
    print(f"n={n} edges={len(edges)} maximal_triangle_free={ok}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="trifree", description="Triangle-free process experiments.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("simulate", help="one run: CSV time series, final snapshot, summary JSON")
    _common(p)
    _run_flags(p)
    p.add_argument("--out", required=True, help="CSV path")
    p.add_argument("--snapshot", default=None)
    p.add_argument("--summary", default=None)
    p.add_argument("--resume", default=None, help="snapshot JSONL to continue from")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ensemble", help="seeds seed..seed+runs-1 in parallel, plus an aggregate CSV")
    _common(p)
    _run_flags(p)
    p.add_argument("--runs", type=int, default=8)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("structure", help="structure calculus report")
    p.add_argument("file", help="structure file, or - for stdin")
    p.add_argument("--n", type=int, default=10**6, help="n for the time scale")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--big-c", type=float, default=20.0)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--families", nargs="*", choices=["open", "plus", "minus", "star"])
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_structure)

    p = sub.add_parser("ygraph", help="sigma-walk counts and averages")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--until-t", type=float, default=None)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--edge", action="append", help="open pair u-v (repeatable)")
    p.add_argument("--sample", type=int, default=5)
    p.add_argument("--sigma", nargs="+", default=["", "L", "R", "LL", "LR", "RL", "RR"])
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_ygraph)

    p = sub.add_parser("witness", help="Ramsey witness certificate")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--guard", type=int, default=400)
    p.add_argument("--node-limit", type=int, default=5_000_000)
    p.add_argument("--heuristic-budget", type=int, default=4)
    p.add_argument("--out", default="witness.json")
    p.add_argument("--graph", default=None)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("replay", help="re-verify an exported graph")
    p.add_argument("file")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("verify", help="oracle and identity suites")
    p.add_argument("--quick", action="store_true", help="restrict to n <= 30")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    a = ap.parse_args(argv)
    try:
        return a.func(a)
    except (ValueError, StructureParseError, StructureTooLarge, FileNotFoundError, MemoryError,
            RuntimeError) as err:
        print(f"trifree {a.cmd}: error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
