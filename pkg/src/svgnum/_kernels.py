"""Inner loops for rasterization and SSIM filtering.

Each kernel has a numba ``@njit`` implementation and a vectorized numpy
implementation with the same arithmetic.  The numba path is used when numba
imports cleanly and ``SVGNUM_NO_NUMBA`` is unset (or ``0``); set
``SVGNUM_NO_NUMBA=1`` to force numpy.  The choice is made once at import.
"""
from __future__ import annotations

import math
import os
import warnings

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def decorator(func):
            return func

        if args and callable(args[0]):
            return args[0]
        return decorator


def _flag_disabled() -> bool:
    return os.environ.get("SVGNUM_NO_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")


USE_NUMBA = HAVE_NUMBA and not _flag_disabled()
BACKEND = "numba" if USE_NUMBA else "numpy"

if not HAVE_NUMBA and not _flag_disabled():  # pragma: no cover
    warnings.warn("numba unavailable; using the numpy kernels")


# --------------------------------------------------------------------------
# winding numbers on a sample grid
#
# ``edges`` is float64 (E, 4): x0, y0, x1, y1 in sample units.  Sample (r, c)
# sits at (c + 0.5, r + 0.5).  An edge contributes to rows whose centre lies
# in [ymin, ymax), and toggles every sample strictly right of its crossing.


@njit(cache=True)
def _winding_numba(edges, rows, cols):
    acc = np.zeros((rows, cols + 1), dtype=np.int32)
    for e in range(edges.shape[0]):
        x0 = edges[e, 0]
        y0 = edges[e, 1]
        x1 = edges[e, 2]
        y1 = edges[e, 3]
        if y0 == y1:
            continue
        d = 1 if y1 > y0 else -1
        lo = min(y0, y1)
        hi = max(y0, y1)
        r0 = int(max(0.0, min(float(rows), math.ceil(lo - 0.5))))
        r1 = int(max(0.0, min(float(rows), math.ceil(hi - 0.5))))
        for r in range(r0, r1):
            yc = r + 0.5
            x = x0 + (yc - y0) * (x1 - x0) / (y1 - y0)
            x = min(max(x, -1.0), cols + 1.0)
            idx = int(math.floor(x - 0.5)) + 1
            if idx < 0:
                idx = 0
            elif idx > cols:
                idx = cols
            acc[r, idx] += d
    out = np.empty((rows, cols), dtype=np.int32)
    for r in range(rows):
        run = 0
        for c in range(cols):
            run += acc[r, c]
            out[r, c] = run
    return out


def _winding_numpy(edges, rows, cols):
    acc = np.zeros((rows, cols + 1), dtype=np.int32)
    edges = np.asarray(edges, dtype=np.float64)
    if len(edges):
        x0, y0, x1, y1 = edges.T
        keep = y0 != y1
        x0, y0, x1, y1 = x0[keep], y0[keep], x1[keep], y1[keep]
        d = np.where(y1 > y0, 1, -1).astype(np.int32)
        lo = np.minimum(y0, y1)
        hi = np.maximum(y0, y1)
        r0 = np.clip(np.ceil(lo - 0.5), 0, rows).astype(np.int64)
        r1 = np.clip(np.ceil(hi - 0.5), 0, rows).astype(np.int64)
        counts = np.maximum(r1 - r0, 0)
        total = int(counts.sum())
        if total:
            e = np.repeat(np.arange(len(counts)), counts)
            starts = np.cumsum(counts) - counts
            r = r0[e] + (np.arange(total) - starts[e])
            yc = r + 0.5
            x = x0[e] + (yc - y0[e]) * (x1[e] - x0[e]) / (y1[e] - y0[e])
            x = np.minimum(np.maximum(x, -1.0), cols + 1.0)
            idx = np.clip(np.floor(x - 0.5).astype(np.int64) + 1, 0, cols)
            np.add.at(acc, (r, idx), d[e])
    return np.cumsum(acc[:, :cols], axis=1, dtype=np.int32)


def winding_grid(edges, rows: int, cols: int) -> np.ndarray:
    edges = np.ascontiguousarray(edges, dtype=np.float64).reshape(-1, 4)
    if USE_NUMBA:
        return _winding_numba(edges, rows, cols)
    return _winding_numpy(edges, rows, cols)


# --------------------------------------------------------------------------
# separable 'valid' correlation with a symmetric 1-D kernel


@njit(cache=True)
def _filter_valid_numba(img, k):
    n = k.shape[0]
    h, w = img.shape
    tmp = np.empty((h - n + 1, w), dtype=np.float64)
    for i in range(h - n + 1):
        for j in range(w):
            s = 0.0
            for t in range(n):
                s += k[t] * img[i + t, j]
            tmp[i, j] = s
    out = np.empty((h - n + 1, w - n + 1), dtype=np.float64)
    for i in range(h - n + 1):
        for j in range(w - n + 1):
            s = 0.0
            for t in range(n):
                s += k[t] * tmp[i, j + t]
            out[i, j] = s
    return out


def _filter_valid_numpy(img, k):
    n = len(k)
    tmp = np.zeros((img.shape[0] - n + 1, img.shape[1]))
    for t in range(n):
        tmp += k[t] * img[t:t + tmp.shape[0], :]
    out = np.zeros((tmp.shape[0], img.shape[1] - n + 1))
    for t in range(n):
        out += k[t] * tmp[:, t:t + out.shape[1]]
    return out


def filter_valid(img, kernel) -> np.ndarray:
    img = np.ascontiguousarray(img, dtype=np.float64)
    kernel = np.ascontiguousarray(kernel, dtype=np.float64)
    if USE_NUMBA:
        return _filter_valid_numba(img, kernel)
    return _filter_valid_numpy(img, kernel)


IMPLEMENTATIONS = {
    "numpy": {"winding_grid": _winding_numpy, "filter_valid": _filter_valid_numpy},
}
if HAVE_NUMBA:
    IMPLEMENTATIONS["numba"] = {"winding_grid": _winding_numba, "filter_valid": _filter_valid_numba}
