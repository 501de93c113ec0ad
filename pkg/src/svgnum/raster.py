"""Fill-only grayscale rendering of the supported dialect.

Curves are flattened to polylines, polylines become edges on a 4x4
supersampled grid, and per-sample winding numbers decide coverage under the
path's fill rule.  Paths are composited in document order over white.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .errors import RenderFailure
from .svg_core import PathCommand, SvgDocument, parse_color

SUPERSAMPLE = 4
FLATTEN_TOLERANCE_PX = 0.05


@dataclass(frozen=True, eq=False)
class RasterImage:
    width: int
    height: int
    pixels: np.ndarray  # (height, width) luminance in [0, 1]

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.shape != (self.height, self.width):
            raise ValueError(f"pixel grid {px.shape} does not match {self.height}x{self.width}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        if px.size and (px.min() < 0.0 or px.max() > 1.0):
            raise ValueError("pixel values must lie in [0, 1]")
        object.__setattr__(self, "pixels", px)

    @classmethod
    def from_array(cls, arr) -> "RasterImage":
        arr = np.asarray(arr, dtype=np.float64)
        return cls(arr.shape[1], arr.shape[0], arr)

    def __eq__(self, other):
        return (
            isinstance(other, RasterImage)
            and self.width == other.width
            and self.height == other.height
            and np.array_equal(self.pixels, other.pixels)
        )


# --------------------------------------------------------------------------
# flattening


def _cubic_point(p0, p1, p2, p3, t):
    mt = 1.0 - t
    return (
        mt ** 3 * p0[0] + 3 * mt * mt * t * p1[0] + 3 * mt * t * t * p2[0] + t ** 3 * p3[0],
        mt ** 3 * p0[1] + 3 * mt * mt * t * p1[1] + 3 * mt * t * t * p2[1] + t ** 3 * p3[1],
    )


def _seg_dist(p, a, b):
    ax, ay = a
    dx, dy = b[0] - ax, b[1] - ay
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return math.hypot(p[0] - ax, p[1] - ay)
    t = max(0.0, min(1.0, ((p[0] - ax) * dx + (p[1] - ay) * dy) / L2))
    return math.hypot(p[0] - ax - t * dx, p[1] - ay - t * dy)


def _flatten_cubic(p0, p1, p2, p3, tol, out, depth=0):
    # control points within tol of the chord bound the whole curve (convex hull)
    if depth >= 18 or max(_seg_dist(p1, p0, p3), _seg_dist(p2, p0, p3)) <= tol:
        out.append(p3)
        return
    m01 = ((p0[0] + p1[0]) / 2, (p0[1] + p1[1]) / 2)
    m12 = ((p1[0] + p2[0]) / 2, (p1[1] + p2[1]) / 2)
    m23 = ((p2[0] + p3[0]) / 2, (p2[1] + p3[1]) / 2)
    a = ((m01[0] + m12[0]) / 2, (m01[1] + m12[1]) / 2)
    b = ((m12[0] + m23[0]) / 2, (m12[1] + m23[1]) / 2)
    mid = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
    _flatten_cubic(p0, m01, a, mid, tol, out, depth + 1)
    _flatten_cubic(mid, b, m23, p3, tol, out, depth + 1)


def _quad_to_cubic(p0, q, p2):
    c1 = (p0[0] + 2.0 / 3.0 * (q[0] - p0[0]), p0[1] + 2.0 / 3.0 * (q[1] - p0[1]))
    c2 = (p2[0] + 2.0 / 3.0 * (q[0] - p2[0]), p2[1] + 2.0 / 3.0 * (q[1] - p2[1]))
    return c1, c2


def _vec_angle(ux, uy, vx, vy):
    return math.atan2(ux * vy - uy * vx, ux * vx + uy * vy)


def arc_to_cubics(p0, rx, ry, phi_deg, large, sweep, p1):
    """Endpoint-parameterized elliptical arc as cubic segments of at most 90 degrees."""
    x1, y1 = p0
    x2, y2 = p1
    if (x1, y1) == (x2, y2):
        return []
    rx, ry = abs(rx), abs(ry)
    if rx == 0 or ry == 0:
        return [((x1, y1), (x2, y2), (x2, y2))]  # degenerate: straight line as a cubic
    phi = math.radians(phi_deg % 360.0)
    cphi, sphi = math.cos(phi), math.sin(phi)
    dx2, dy2 = (x1 - x2) / 2.0, (y1 - y2) / 2.0
    x1p = cphi * dx2 + sphi * dy2
    y1p = -sphi * dx2 + cphi * dy2
    lam = (x1p / rx) ** 2 + (y1p / ry) ** 2
    if lam > 1.0:
        s = math.sqrt(lam)
        rx, ry = rx * s, ry * s
    num = rx * rx * ry * ry - rx * rx * y1p * y1p - ry * ry * x1p * x1p
    den = rx * rx * y1p * y1p + ry * ry * x1p * x1p
    coef = math.sqrt(max(0.0, num / den)) if den > 0 else 0.0
    if bool(large) == bool(sweep):
        coef = -coef
    cxp = coef * rx * y1p / ry
    cyp = -coef * ry * x1p / rx
    cx = cphi * cxp - sphi * cyp + (x1 + x2) / 2.0
    cy = sphi * cxp + cphi * cyp + (y1 + y2) / 2.0
    ux, uy = (x1p - cxp) / rx, (y1p - cyp) / ry
    vx, vy = (-x1p - cxp) / rx, (-y1p - cyp) / ry
    theta1 = _vec_angle(1.0, 0.0, ux, uy)
    dtheta = _vec_angle(ux, uy, vx, vy)
    if not sweep and dtheta > 0:
        dtheta -= 2 * math.pi
    elif sweep and dtheta < 0:
        dtheta += 2 * math.pi

    def point(t):
        ex, ey = rx * math.cos(t), ry * math.sin(t)
        return (cx + cphi * ex - sphi * ey, cy + sphi * ex + cphi * ey)

    def deriv(t):
        ex, ey = -rx * math.sin(t), ry * math.cos(t)
        return (cphi * ex - sphi * ey, sphi * ex + cphi * ey)

    n = max(1, int(math.ceil(abs(dtheta) / (math.pi / 2) - 1e-9)))
    delta = dtheta / n
    alpha = 4.0 / 3.0 * math.tan(delta / 4.0)
    segs = []
    t = theta1
    start = (x1, y1)
    for i in range(n):
        t2 = t + delta
        end = (x2, y2) if i == n - 1 else point(t2)
        d1, d2 = deriv(t), deriv(t2)
        c1 = (start[0] + alpha * d1[0], start[1] + alpha * d1[1])
        c2 = (end[0] - alpha * d2[0], end[1] - alpha * d2[1])
        segs.append((c1, c2, end))
        start, t = end, t2
    return segs


def flatten_path(commands, tolerance: float) -> list[tuple[np.ndarray, bool]]:
    """Resolve a command list into absolute polylines ``(points, closed)``."""
    if not tolerance > 0:
        raise ValueError("tolerance must be > 0")
    polylines = []
    cur = None
    start = (0.0, 0.0)
    pos = (0.0, 0.0)
    last_ctrl = None  # reflected by S / T
    last_kind = ""

    def flush(closed):
        nonlocal cur
        if cur is not None and len(cur) >= 2:
            polylines.append((np.array(cur, dtype=np.float64), closed))
        elif cur is not None and closed and len(cur) == 1:
            polylines.append((np.array(cur, dtype=np.float64), True))
        cur = None

    def ensure():
        nonlocal cur
        if cur is None:
            cur = [pos]

    for cmd in commands:
        op, p = cmd.opcode, cmd.params
        up = op.upper()
        ox, oy = pos if op.islower() else (0.0, 0.0)
        ctrl, kind = None, ""
        if up == "M":
            flush(False)
            pos = (ox + p[0], oy + p[1])
            start = pos
            cur = [pos]
        elif up == "Z":
            ensure()
            flush(True)
            pos = start
        elif up in "LHV":
            ensure()
            if up == "L":
                pos = (ox + p[0], oy + p[1])
            elif up == "H":
                pos = (ox + p[0], pos[1])
            else:
                pos = (pos[0], oy + p[0])
            cur.append(pos)
        elif up in "CS":
            ensure()
            if up == "C":
                c1 = (ox + p[0], oy + p[1])
                c2 = (ox + p[2], oy + p[3])
                end = (ox + p[4], oy + p[5])
            else:
                c1 = (2 * pos[0] - last_ctrl[0], 2 * pos[1] - last_ctrl[1]) if last_kind == "C" else pos
                c2 = (ox + p[0], oy + p[1])
                end = (ox + p[2], oy + p[3])
            _flatten_cubic(pos, c1, c2, end, tolerance, cur)
            ctrl, kind = c2, "C"
            pos = end
        elif up in "QT":
            ensure()
            if up == "Q":
                q = (ox + p[0], oy + p[1])
                end = (ox + p[2], oy + p[3])
            else:
                q = (2 * pos[0] - last_ctrl[0], 2 * pos[1] - last_ctrl[1]) if last_kind == "Q" else pos
                end = (ox + p[0], oy + p[1])
            c1, c2 = _quad_to_cubic(pos, q, end)
            _flatten_cubic(pos, c1, c2, end, tolerance, cur)
            ctrl, kind = q, "Q"
            pos = end
        elif up == "A":
            ensure()
            end = (ox + p[5], oy + p[6])
            for c1, c2, e in arc_to_cubics(pos, p[0], p[1], p[2], p[3], p[4], end):
                _flatten_cubic(cur[-1], c1, c2, e, tolerance, cur)
            cur[-1] = end
            pos = end
        last_ctrl, last_kind = ctrl, kind
    flush(False)
    return polylines


# --------------------------------------------------------------------------
# rasterization


def _luminance(rgb) -> float:
    r, g, b = rgb
    return (0.2126 * r + 0.7152 * g + 0.0722 * b) / 255.0


def view_transform(view_box, width, height):
    """Uniform scale + centering of the viewBox inside the pixel grid (xMidYMid meet)."""
    vx, vy, vw, vh = view_box
    s = min(width / vw, height / vh)
    tx = (width - vw * s) / 2.0 - vx * s
    ty = (height - vh * s) / 2.0 - vy * s
    return s, tx, ty


def _edges(polylines, s, tx, ty, ss):
    chunks = []
    for pts, _closed in polylines:
        if len(pts) < 2:
            continue
        q = np.empty_like(pts)
        q[:, 0] = (pts[:, 0] * s + tx) * ss
        q[:, 1] = (pts[:, 1] * s + ty) * ss
        chunks.append(np.hstack([q, np.roll(q, -1, axis=0)]))
    if not chunks:
        return np.zeros((0, 4))
    return np.vstack(chunks)


def coverage(polylines, fill_rule, width, height, s=1.0, tx=0.0, ty=0.0, ss=SUPERSAMPLE):
    """Fraction of each pixel's ss x ss samples inside the filled polylines."""
    cov = np.zeros((height, width))
    edges = _edges(polylines, s, tx, ty, ss)
    if not len(edges):
        return cov
    # Polylines are closed, so winding is zero outside the edge bounding box;
    # only the covered pixel window is sampled.
    xs, ys = edges[:, 0::2], edges[:, 1::2]
    px0 = int(np.clip(np.floor(xs.min() / ss), 0, width))
    px1 = int(np.clip(np.ceil(xs.max() / ss) + 1, 0, width))
    py0 = int(np.clip(np.floor(ys.min() / ss), 0, height))
    py1 = int(np.clip(np.ceil(ys.max() / ss) + 1, 0, height))
    if px0 >= px1 or py0 >= py1:
        return cov
    local = edges - np.array([px0 * ss, py0 * ss, px0 * ss, py0 * ss], dtype=np.float64)
    h, w = py1 - py0, px1 - px0
    wind = _kernels.winding_grid(local, h * ss, w * ss)
    inside = (wind & 1) != 0 if fill_rule == "evenodd" else wind != 0
    counts = inside.view(np.uint8).reshape(h, ss, w, ss).sum(axis=3, dtype=np.int32).sum(axis=1)
    cov[py0:py1, px0:px1] = counts * (1.0 / (ss * ss))
    return cov


def rasterize(doc: SvgDocument, width: int, height: int) -> RasterImage:
    if width <= 0 or height <= 0:
        raise RenderFailure("output size must be positive")
    vx, vy, vw, vh = doc.view_box
    if not (vw > 0 and vh > 0) or not all(map(math.isfinite, doc.view_box)):
        raise RenderFailure("degenerate viewBox")
    s, tx, ty = view_transform(doc.view_box, width, height)
    tol = FLATTEN_TOLERANCE_PX / s
    img = np.ones((height, width), dtype=np.float64)
    for path in doc.paths:
        color = parse_color(path.attributes.get("fill", doc.default_fill))
        if color is None:
            continue
        polylines = flatten_path(path.commands, tol)
        if any(not np.isfinite(p).all() for p, _ in polylines):
            raise RenderFailure("non-finite geometry")
        cov = coverage(polylines, path.fill_rule, width, height, s, tx, ty)
        img = img * (1.0 - cov) + _luminance(color) * cov
    return RasterImage(width, height, np.clip(img, 0.0, 1.0))


# --------------------------------------------------------------------------
# PGM (P5, 8-bit) for debugging and the external provider protocol


def write_pgm(image: RasterImage, path) -> None:
    data = np.rint(image.pixels * 255.0).astype(np.uint8)
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + data.tobytes())


def read_pgm(path) -> RasterImage:
    raw = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            while pos < len(raw) and raw[pos:pos + 1] != b"\n":
                pos += 1
            continue
        end = pos
        while end < len(raw) and not raw[end:end + 1].isspace():
            end += 1
        fields.append(raw[pos:end])
        pos = end
    if fields[0] != b"P5":
        raise ValueError("only binary PGM (P5) is supported")
    w, h, maxval = (int(f) for f in fields[1:])
    if maxval != 255:
        raise ValueError("only 8-bit PGM is supported")
    pos += 1
    data = np.frombuffer(raw[pos:pos + w * h], dtype=np.uint8)
    if data.size != w * h:
        raise ValueError("truncated PGM")
    return RasterImage(w, h, data.reshape(h, w) / 255.0)
