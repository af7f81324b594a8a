"""Compare the compiled and pure-numpy kernel backends on the hot samplers.

Runs the full conditional sweep and the pruned hierarchical sweep over a
range of grid sizes under both backends and prints a wall-time table.
Usage:

    python benchmarks/compare_backends.py [--k 8,10,12,14] [--seed 0] [--repeat 3]
"""

from __future__ import annotations

import argparse
import dataclasses
import time

from kronnet import (
    HAS_NUMBA,
    CapExceeded,
    ModelSampler,
    Strategy,
    backend,
    make_config,
)
from kronnet.output import format_table

BASE_THETA = [[0.9, 0.7], [0.5, 0.3]]


def time_point(cfg, strategy, backend_name, seed, repeat):
    with backend(backend_name):
        engine = ModelSampler(cfg)
        engine.run(strategy, seed)  # warm-up; first numba call compiles
        best = float("inf")
        for _ in range(repeat):
            start = time.perf_counter()
            _, trace = engine.run(strategy, seed)
            best = min(best, time.perf_counter() - start)
    return best, trace.total_examined


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--k", default="8,10,12,14")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = ["numba", "numpy"] if HAS_NUMBA else ["numpy"]
    if not HAS_NUMBA:
        print("numba unavailable; timing the numpy backend only")
    base = make_config(BASE_THETA, 3, 2)
    rows = []
    for k_str in args.k.split(","):
        levels = int(k_str)
        cfg = dataclasses.replace(base, levels=levels)
        for strategy in (Strategy.CI, Strategy.DCSD):
            timings = {}
            examined = None
            for name in backends:
                try:
                    timings[name], examined = time_point(
                        cfg, strategy, name, args.seed, args.repeat
                    )
                except CapExceeded as exc:
                    timings[name] = None
                    refusal = str(exc)
            row = [levels, strategy.value]
            for name in backends:
                row.append("refused" if timings[name] is None else f"{timings[name]:.4f}")
            if all(t is None for t in timings.values()):
                row.append(refusal)
            else:
                row.append(examined)
            rows.append(row)
    headers = ["k", "strategy"] + [f"{name}_s" for name in backends] + ["rvs_examined"]
    print(format_table(headers, rows), end="")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
