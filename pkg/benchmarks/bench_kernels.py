"""Numba vs numpy kernels on realistic inputs.

    python benchmarks/bench_kernels.py [--repeat 20] [--size 256] [--json]

The winding kernel gets the edge list of a desk-corpus document at the
given render size; the filter kernel gets the five SSIM moment images of a
``size x size`` pair.  Both backends must agree bit for bit; the script
refuses to report timings otherwise.
"""
from __future__ import annotations

import argparse
import json
import statistics
import time
from pathlib import Path

import numpy as np

from svgnum import _kernels
from svgnum.metrics import SsimConfig, gaussian_kernel
from svgnum.raster import SUPERSAMPLE, _edges, flatten_path, view_transform, FLATTEN_TOLERANCE_PX
from svgnum.svg_core import parse_svg

ROOT = Path(__file__).resolve().parent.parent


def corpus_edges(size: int, limit: int = 20):
    files = sorted((ROOT / "corpus" / "desk").glob("*.svg"))[:limit]
    jobs = []
    for f in files:
        doc = parse_svg(f.read_text())
        s, tx, ty = view_transform(doc.view_box, size, size)
        for path in doc.paths:
            lines = flatten_path(path.commands, FLATTEN_TOLERANCE_PX / s)
            jobs.append(_edges(lines, s, tx, ty, SUPERSAMPLE))
    return jobs


def timed(func, repeat: int) -> list[float]:
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        func()
        out.append(time.perf_counter() - t0)
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description="compare numba and numpy kernels")
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)

    if "numba" not in _kernels.IMPLEMENTATIONS:
        print("numba is not importable; nothing to compare")
        return 1
    rows = cols = args.size * SUPERSAMPLE
    edge_jobs = corpus_edges(args.size)
    rng = np.random.default_rng(0)
    x, y = rng.random((args.size, args.size)), rng.random((args.size, args.size))
    images = [x, y, x * x, y * y, x * y]
    kernel = gaussian_kernel(SsimConfig())

    cases = {
        "winding_grid": (lambda impl: [impl(e, rows, cols) for e in edge_jobs]),
        "filter_valid": (lambda impl: [impl(im, kernel) for im in images]),
    }
    results = []
    for name, run in cases.items():
        numba_impl = _kernels.IMPLEMENTATIONS["numba"][name]
        numpy_impl = _kernels.IMPLEMENTATIONS["numpy"][name]
        ref, got = run(numpy_impl), run(numba_impl)  # second call also JIT-compiles
        if not all(np.array_equal(a, b) for a, b in zip(ref, got)):
            print(f"{name}: backends disagree; timings suppressed")
            return 1
        t_numpy = timed(lambda: run(numpy_impl), args.repeat)
        t_numba = timed(lambda: run(numba_impl), args.repeat)
        results.append({
            "kernel": name,
            "numpy_median_s": statistics.median(t_numpy),
            "numba_median_s": statistics.median(t_numba),
            "speedup": statistics.median(t_numpy) / statistics.median(t_numba),
        })

    if args.json:
        print(json.dumps(results, indent=2))
    else:
        print(f"{'kernel':<14}{'numpy (ms)':>12}{'numba (ms)':>12}{'speedup':>9}")
        for r in results:
            print(f"{r['kernel']:<14}{1e3 * r['numpy_median_s']:>12.2f}"
                  f"{1e3 * r['numba_median_s']:>12.2f}{r['speedup']:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
