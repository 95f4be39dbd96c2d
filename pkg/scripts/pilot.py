"""Pilot ensemble: measure seeds 1000.. and freeze the acceptance bands.

    python scripts/pilot.py [--out calibration/pilot.json] [--seed0 1000]
"""

import argparse
import json
import time

from trifree import calibration


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(calibration.DEFAULT_PATH))
    ap.add_argument("--seed0", type=int, default=calibration.PilotConfig.seed0)
    a = ap.parse_args()
    cfg = calibration.PilotConfig(seed0=a.seed0)
    t0 = time.perf_counter()
    data = calibration.collect(cfg, log=lambda msg: print(msg, flush=True))
    cal = calibration.calibrate(cfg, data)
    cal["wall_seconds"] = round(time.perf_counter() - t0, 1)
    calibration.save(cal, a.out)
    print(json.dumps(cal, indent=2))


if __name__ == "__main__":
    main()
