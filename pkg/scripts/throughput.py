"""Per-clip latency of the event pipeline as the number of boxes per frame grows."""
import argparse
import statistics
import time

import numpy as np

from stallmon.events import run_pipeline
from stallmon.geometry import Box
from stallmon.scenarios import reference_config
from stallmon.tracking import Detection


def clip(rng, n_boxes, n_frames=60):
    dets = []
    for j in range(n_boxes):
        x, y = float(rng.uniform(0, 1100)), float(rng.uniform(0, 500))
        vx = float(rng.normal(0, 3))
        cls = {"horse": 0.9, "person": 0.1} if j % 2 else {"horse": 0.1, "person": 0.9}
        for f in range(n_frames):
            dets.append(Detection(f, Box(min(max(x + vx * f, 0.0), 1100.0), y, 120, 150), cls))
    dets.sort(key=lambda d: d.frame_idx)
    return dets


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--boxes", type=int, nargs="+", default=[0, 1, 5, 10, 20, 40])
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()
    cfg = reference_config()
    rng = np.random.default_rng(0)
    print(f"{'boxes':>5} {'median ms':>10} {'p95 ms':>8}")
    for n in args.boxes:
        times = []
        for _ in range(args.repeats):
            dets = clip(rng, n)
            t0 = time.perf_counter()
            run_pipeline(dets, cfg, "bench")
            times.append((time.perf_counter() - t0) * 1e3)
        times.sort()
        print(f"{n:5d} {statistics.median(times):10.1f} {times[int(0.95 * (len(times) - 1))]:8.1f}")


if __name__ == "__main__":
    main()
