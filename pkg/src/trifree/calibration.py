"""Large-n ensemble measurements and the bands calibrated from them.

A pilot ensemble (``scripts/pilot.py``) writes ``calibration/pilot.json``;
the acceptance suite measures a disjoint seed range and judges it against
those bands.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import process
from .analysis import alpha_heuristic
from .process import RunConfig, degrees, new_state
from .trajectory import SQRT8_INV, Params

DEFAULT_PATH = Path(__file__).resolve().parents[2] / "calibration" / "pilot.json"
INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass
class BandDeviation:
    """Largest |value/tilde - 1| over the window 0.2 <= t <= 0.9 t*."""

    q: float
    y: float
    x: float
    points: int


@dataclass
class Measurement:
    n: int
    seed: int
    final_m: int
    max_deg: int
    elapsed: float
    band: BandDeviation | None = None
    alpha: int | None = None

    @property
    def edge_ratio(self) -> float:
        return self.final_m / (self.n ** 1.5 * math.sqrt(math.log(self.n)))

    @property
    def degree_ratio(self) -> float:
        return self.max_deg / math.sqrt(self.n * math.log(self.n))

    @property
    def alpha_ratio(self) -> float:
        return math.nan if self.alpha is None else self.alpha / math.sqrt(self.n * math.log(self.n))


def band_deviation(records, params: Params, lo: float = 0.2, hi_frac: float = 0.9) -> BandDeviation:
    hi = hi_frac * params.t_star
    win = [r for r in records if lo <= r.t <= hi]
    if not win:
        raise ValueError(f"no records with {lo} <= t <= {hi:.4f}")
    dq = max(abs(r.q / r.q_tilde - 1) for r in win)
    dy = max(abs(r.ybar / r.y_tilde - 1) for r in win)
    dx = max(abs(r.xbar / r.x_tilde - 1) for r in win)
    return BandDeviation(dq, dy, dx, len(win))


def measure(n: int, seed: int, trajectory: bool = False, alpha_iterations: int | None = None,
            eps: float = 0.1, sample_size: int = 4096) -> Measurement:
    """Run one process to completion and keep only the numbers the ensemble needs."""
    t0 = time.perf_counter()
    cfg = RunConfig(n=n, seed=seed)
    st = new_state(cfg)
    band = None
    if trajectory:
        params = Params(n=n, eps=eps)
        st, records = process.run(st, cfg, params, sample_size)
        band = band_deviation(records, params)
    else:
        process.advance(st, cfg.stop_m)
    max_deg = int(degrees(st).max())
    elapsed = time.perf_counter() - t0
    alpha = None
    if alpha_iterations is not None:
        alpha = alpha_heuristic(st, iterations=alpha_iterations, seed=seed)
    return Measurement(n, seed, st.m, max_deg, elapsed, band, alpha)


def median_band(values, k: float = 5.0) -> dict:
    """Median with a +- k standard-error band (median s.e. ~ 1.2533 sd / sqrt(runs))."""
    v = np.asarray(values, dtype=float)
    med = float(np.median(v))
    sd = float(np.std(v, ddof=1)) if len(v) > 1 else 0.0
    se = 1.2533 * sd / math.sqrt(len(v))
    return {"runs": len(v), "median": med, "sd": sd, "se_median": se,
            "lo": med - k * se, "hi": med + k * se}


def spread_band(values, k: float = 5.0) -> dict:
    """Median of per-run values with a +- k sd spread band."""
    v = np.asarray(values, dtype=float)
    med = float(np.median(v))
    sd = float(np.std(v, ddof=1)) if len(v) > 1 else 0.0
    return {"runs": len(v), "median": med, "sd": sd, "lo": med - k * sd, "hi": med + k * sd,
            "max": float(v.max())}


@dataclass
class PilotConfig:
    seed0: int = 1000
    band_n: int = 2 ** 13
    band_runs: int = 10
    ratio_sizes: tuple[int, ...] = (2 ** 10, 2 ** 11, 2 ** 12, 2 ** 13)
    ratio_runs: int = 20
    end_n: int = 2 ** 12
    end_runs: int = 20
    alpha_iterations: int = 2 ** 12
    k: float = 5.0
    eps: float = 0.1


@dataclass
class EnsembleData:
    bands: list[Measurement] = field(default_factory=list)
    ratios: dict[int, list[Measurement]] = field(default_factory=dict)
    end: list[Measurement] = field(default_factory=list)


def collect(cfg: PilotConfig, seed0: int | None = None, log=None) -> EnsembleData:
    """Every run the calibrated criteria look at, with band runs reused for the edge ratio."""
    data = EnsembleData()
    say = log or (lambda msg: None)
    seed0 = cfg.seed0 if seed0 is None else seed0
    seeds = range(seed0, seed0 + max(cfg.band_runs, cfg.ratio_runs, cfg.end_runs))
    for n in cfg.ratio_sizes:
        data.ratios[n] = []
        for i, s in enumerate(seeds[:cfg.ratio_runs]):
            traj = n == cfg.band_n and i < cfg.band_runs
            alpha = cfg.alpha_iterations if n == cfg.end_n and i < cfg.end_runs else None
            meas = measure(n, s, trajectory=traj, alpha_iterations=alpha, eps=cfg.eps)
            data.ratios[n].append(meas)
            if traj:
                data.bands.append(meas)
            if alpha is not None:
                data.end.append(meas)
            say(f"n={n} seed={s} m={meas.final_m} ratio={meas.edge_ratio:.4f} "
                f"deg={meas.degree_ratio:.4f} alpha={meas.alpha_ratio:.4f} {meas.elapsed:.1f}s")
    if cfg.end_n not in cfg.ratio_sizes:
        data.end = [measure(cfg.end_n, s, alpha_iterations=cfg.alpha_iterations, eps=cfg.eps)
                    for s in seeds[:cfg.end_runs]]
    return data


def calibrate(cfg: PilotConfig, data: EnsembleData) -> dict:
    bands = {
        key: spread_band([getattr(m.band, key) for m in data.bands], cfg.k) for key in ("q", "y", "x")
    }
    ratio = {str(n): median_band([m.edge_ratio for m in ms], cfg.k) for n, ms in data.ratios.items()}
    dist = [abs(ratio[str(n)]["median"] - SQRT8_INV) for n in sorted(data.ratios)]
    monotone = all(b <= a for a, b in zip(dist, dist[1:]))
    return {
        "config": asdict(cfg),
        "band_deviation": bands,
        "edge_ratio": ratio,
        "edge_ratio_distances": dist,
        "edge_ratio_monotone": monotone,
        "degree_ratio": median_band([m.degree_ratio for m in data.end], cfg.k),
        "alpha_ratio": median_band([m.alpha_ratio for m in data.end], cfg.k),
        "alpha_min": min(m.alpha_ratio for m in data.end),
    }


def save(cal: dict, path: str | Path = DEFAULT_PATH) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(cal, indent=2) + "\n")


def load(path: str | Path = DEFAULT_PATH) -> dict:
    return json.loads(Path(path).read_text())
