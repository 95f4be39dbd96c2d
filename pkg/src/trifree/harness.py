"""Experiment configs, CSV time series, single runs and parallel ensembles."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import process
from .process import RunConfig, new_state
from .structures import (building_sequence, derived_families, is_balanced, is_permissible,
                         rho_star, tracking_time, weights)
from .trajectory import Params, RunRecord

CSV_VERSION = 1
CSV_COLUMNS = ["run_id", "m", "t", "q", "q_tilde", "q_star", "ybar", "y_tilde", "ybar_star",
               "xbar", "x_tilde", "xbar_star", "lambda", "mu", "lyapunov", "max_deg",
               "var_y", "cov_xy", "sample_size"]
_INT_COLUMNS = {"run_id", "m", "q", "max_deg", "sample_size"}
_FIELD_OF = {c: ("lambda_" if c == "lambda" else c) for c in CSV_COLUMNS if c != "run_id"}


class CsvSchemaError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    seeds: tuple[int, ...] = (0,)
    eps: float = 0.1
    big_c: float = 20.0
    omega: float | None = None
    record_every: int | None = None
    instrumentation: str = "light"
    until_t: float | None = None
    max_steps: int | None = None
    sample_size: int = 4096
    out: str = "out"
    jobs: int = 1

    def __post_init__(self):
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be distinct")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")
        if not self.seeds:
            raise ValueError("need at least one seed")

    def params(self) -> Params:
        return Params(n=self.n, eps=self.eps, big_c=self.big_c, omega=self.omega)

    def run_config(self, seed: int) -> RunConfig:
        return RunConfig(n=self.n, seed=seed, max_steps=self.max_steps, until_t=self.until_t,
                         instrumentation=self.instrumentation, record_every=self.record_every)


# ------------------------------------------------------------------ CSV

def _fmt(value, integer: bool) -> str:
    if integer:
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return "%.9g" % v


def emit_rows(run_id: int, records: list[RunRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        row = [str(int(run_id))]
        for c in CSV_COLUMNS[1:]:
            row.append(_fmt(getattr(r, _FIELD_OF[c]), c in _INT_COLUMNS))
        w.writerow(row)
    return buf.getvalue()


def parse_rows(text: str) -> tuple[list[int], list[RunRecord]]:
    """Inverse of emit_rows; the header doubles as the schema check."""
    rd = csv.reader(io.StringIO(text))
    header = next(rd, None)
    if header != CSV_COLUMNS:
        raise CsvSchemaError(f"CSV header does not match schema v{CSV_VERSION}: {header}")
    ids, recs = [], []
    for lineno, row in enumerate(rd, start=2):
        if len(row) != len(CSV_COLUMNS):
            raise CsvSchemaError(f"line {lineno}: expected {len(CSV_COLUMNS)} fields, got {len(row)}")
        vals = dict(zip(CSV_COLUMNS, row))
        ids.append(int(vals["run_id"]))
        kw = {_FIELD_OF[c]: (int(vals[c]) if c in _INT_COLUMNS else float(vals[c])) for c in CSV_COLUMNS[1:]}
        recs.append(RunRecord(**kw))
    return ids, recs


# ------------------------------------------------------------------ runs

@dataclass
class RunResult:
    seed: int
    csv_text: str
    final_m: int
    final_q: int
    max_deg: int
    elapsed: float
    snapshot: dict | None = None


def run_one(config: ExperimentConfig, seed: int, resume: dict | None = None,
            keep_snapshot: bool = False) -> RunResult:
    """One seeded run with RunRecords every record_every steps (default n)."""
    t0 = time.perf_counter()
    rc = config.run_config(seed)
    if resume is not None:
        if resume["n"] != config.n or resume["seed"] != seed:
            raise ValueError("snapshot n/seed do not match the requested run")
        state = process.restore(resume, config.instrumentation)
    else:
        state = new_state(rc)
    state, records = process.run(state, rc, config.params(), config.sample_size)
    return RunResult(seed, emit_rows(seed, records), state.m, state.q, records[-1].max_deg,
                     time.perf_counter() - t0, process.snapshot(state) if keep_snapshot else None)


def summary(config: ExperimentConfig, res: RunResult) -> dict:
    p = config.params()
    n = config.n
    return {
        "csv_version": CSV_VERSION,
        "n": n,
        "seed": res.seed,
        "eps": p.eps,
        "big_c": p.big_c,
        "omega": p.omega_value,
        "t_star": p.t_star,
        "m_star": p.m_star,
        "record_every": config.record_every if config.record_every is not None else n,
        "instrumentation": config.instrumentation,
        "final_m": res.final_m,
        "final_q": res.final_q,
        "completed": res.final_q == 0,
        "edge_ratio": res.final_m / (n ** 1.5 * math.sqrt(math.log(n))),
        "max_deg": res.max_deg,
        "elapsed_s": round(res.elapsed, 3),
    }


def simulate(config: ExperimentConfig, csv_path: str | Path, snapshot_path: str | Path | None = None,
             summary_path: str | Path | None = None, resume_path: str | Path | None = None) -> dict:
    seed = config.seeds[0]
    resume = None
    if resume_path is not None:
        lines = [ln for ln in Path(resume_path).read_text().splitlines() if ln.strip()]
        resume = json.loads(lines[-1])
    res = run_one(config, seed, resume, keep_snapshot=snapshot_path is not None)
    Path(csv_path).write_text(res.csv_text)
    if snapshot_path is not None:
        Path(snapshot_path).write_text(json.dumps(res.snapshot, separators=(",", ":")) + "\n")
    info = summary(config, res)
    if summary_path is not None:
        Path(summary_path).write_text(json.dumps(info, indent=2) + "\n")
    return info


# ------------------------------------------------------------- ensembles

def _worker(args):
    config, seed = args
    return run_one(config, seed)


def run_ensemble(config: ExperimentConfig) -> list[RunResult]:
    """Independent per-seed runs; results come back ordered by seed.

    Any failure aborts the whole ensemble with a summary of what broke.
    """
    if config.jobs == 1:
        return [run_one(config, s) for s in config.seeds]
    results, failures = {}, {}
    with ProcessPoolExecutor(max_workers=config.jobs) as pool:
        futs = {pool.submit(_worker, (config, s)): s for s in config.seeds}
        for fut in as_completed(futs):
            s = futs[fut]
            try:
                results[s] = fut.result()
            except Exception as err:  # noqa: BLE001 - reported below
                failures[s] = f"{type(err).__name__}: {err}"
                for other in futs:
                    other.cancel()
    if failures:
        raise RuntimeError(f"ensemble aborted: {len(failures)} of {len(config.seeds)} runs failed: {failures}")
    return [results[s] for s in config.seeds]


AGG_STATS = ("median", "q10", "q90")


def aggregate(csv_texts: list[str]) -> str:
    """Per-m median and 10/90% quantiles across runs; a pure function of the per-run CSVs."""
    by_m: dict[int, list[RunRecord]] = {}
    for text in csv_texts:
        _, recs = parse_rows(text)
        for r in recs:
            by_m.setdefault(r.m, []).append(r)
    cols = [c for c in CSV_COLUMNS[1:] if c != "m"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "runs"] + [f"{c}_{s}" for c in cols for s in AGG_STATS])
    for m in sorted(by_m):
        recs = by_m[m]
        row = [str(m), str(len(recs))]
        for c in cols:
            vals = np.array([float(getattr(r, _FIELD_OF[c])) for r in recs])
            vals = vals[~np.isnan(vals)]
            if len(vals) == 0:
                row += ["nan"] * 3
            else:
                q = np.quantile(vals, [0.5, 0.1, 0.9])
                row += [_fmt(x, False) for x in q]
        w.writerow(row)
    return buf.getvalue()


def ensemble(config: ExperimentConfig, out_dir: str | Path) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = run_ensemble(config)
    paths = []
    for res in results:
        p = out / f"run_{res.seed}.csv"
        p.write_text(res.csv_text)
        paths.append(str(p))
    (out / "aggregate.csv").write_text(aggregate([r.csv_text for r in results]))
    info = {
        "csv_version": CSV_VERSION,
        "n": config.n,
        "seeds": list(config.seeds),
        "jobs": config.jobs,
        "params": config.params().as_dict(),
        "runs": [summary(config, r) for r in results],
        "files": paths,
        "aggregate": str(out / "aggregate.csv"),
    }
    (out / "summary.json").write_text(json.dumps(info, indent=2) + "\n")
    return info


# ------------------------------------------------------------- structures

def _finite(x: float):
    return x if math.isfinite(x) else str(x)


def structure_report(pair, params: Params, families: tuple[str, ...] = ()) -> dict:
    """Everything the structure calculus says about one anchored pair, JSON-ready."""
    def names(s):
        return [x for x in pair.vertices if x in s]

    bs = building_sequence(pair)
    rho, t_a = tracking_time(pair, params)
    w = weights(pair, params)
    rep = {
        "structure": pair.to_text(),
        "v_A": pair.v_a,
        "e": pair.e,
        "o": pair.o,
        "permissible": is_permissible(pair.structure),
        "rho_star": str(rho_star(pair)),
        "rho_min": str(rho),
        "t_A": _finite(t_a),
        "t_A_uncapped": _finite(rho.t(params.n)),
        "t_star": params.t_star,
        "balanced": is_balanced(pair),
        "building_sequence": {
            "length": bs.length,
            "chain": [names(h) for h in bs.chain],
            "rho": [str(r) for r in bs.times],
        },
        "weights": {
            "delta_base": w.delta_base,
            "log_delta": _finite(w.log_delta),
            "log_delta_minus_v": _finite(w.log_delta_minus_v),
            "c": None if w.c is None else str(w.c),
        },
        "params": params.as_dict(),
    }
    fam = {}
    for which in families:
        fam[which] = [{"case": d.case, "detail": list(d.detail), "structure": d.pair.to_text()}
                      for d in derived_families(pair, which)]
    if fam:
        rep["families"] = fam
    return rep


def format_structure_report(rep: dict) -> str:
    lines = [rep["structure"], ""]
    lines.append(f"v_A={rep['v_A']} e={rep['e']} o={rep['o']} permissible={rep['permissible']}")
    lines.append(f"rho*={rep['rho_star']} rho_min={rep['rho_min']} t_A={rep['t_A']} (t*={rep['t_star']:.6g})")
    lines.append(f"c={rep['weights']['c']} log Delta={rep['weights']['log_delta']}")
    bs = rep["building_sequence"]
    lines.append(f"building sequence (length {bs['length']}, balanced={rep['balanced']}):")
    for h, r in zip(bs["chain"], bs["rho"]):
        lines.append(f"  rho={r:>8}  {{{', '.join(h)}}}")
    for which, members in rep.get("families", {}).items():
        lines.append(f"family {which}: {len(members)} members")
        for mbr in members:
            lines.append(f"  [{mbr['case']}] {' '.join(map(str, mbr['detail']))}: "
                         + mbr["structure"].replace("\n", "; "))
    return "\n".join(lines)
