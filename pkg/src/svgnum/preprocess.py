"""Canvas normalization and the acceptance gate for training documents.

Every document is fitted into ``[-M, M]^2`` with one global scale factor
``s = M / max_abs_numeric(doc)`` and then checked twice: no emitted literal
may exceed ``M`` after rounding, and the normalized rendering must stay
structurally similar to the original.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import DegenerateDocument, SvgNumError
from .svg_core import (
    PathCommand,
    PathElement,
    SvgDocument,
    document_numbers,
    map_numbers,
    round_half_away,
)


@dataclass(frozen=True)
class CanvasConfig:
    M: float = 512.0
    ssim_threshold: float = 0.99
    precision: int = 3
    render_size: int = 256

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("M must be > 0")
        if not 0.0 <= self.ssim_threshold <= 1.0:
            raise ValueError("ssim_threshold must lie in [0, 1]")
        if self.precision < 0:
            raise ValueError("precision must be >= 0")

    @property
    def rounding_slack(self) -> float:
        return 0.5 * 10.0 ** (-self.precision)


class Reason(str, enum.Enum):
    OK = "Ok"
    OUT_OF_BOUNDS = "OutOfBounds"
    LOW_SSIM = "LowSsim"
    PARSE_FAILURE = "ParseFailure"


@dataclass(frozen=True)
class FilterVerdict:
    accepted: bool
    reason: Reason
    ssim: Optional[float] = None
    max_abs_value: Optional[float] = None

    def __post_init__(self):
        if self.accepted != (self.reason is Reason.OK):
            raise ValueError("accepted must hold exactly when reason is Ok")

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "reason": self.reason.value,
            "ssim": self.ssim,
            "max_abs_value": self.max_abs_value,
        }


# indices of arc parameters that are not lengths (rotation, large-arc, sweep)
_ARC_UNSCALED = (2, 3, 4)


def _scalable(cmd: PathCommand):
    if cmd.opcode in "Aa":
        return [p for i, p in enumerate(cmd.params) if i not in _ARC_UNSCALED]
    return cmd.params


def absolute_points(commands) -> list[tuple[float, float]]:
    """Every endpoint and explicit control point, resolved to absolute coordinates."""
    pts = []
    cx = cy = sx = sy = 0.0
    for cmd in commands:
        op, p = cmd.opcode, cmd.params
        rel = op.islower()
        ox, oy = (cx, cy) if rel else (0.0, 0.0)
        up = op.upper()
        if up == "Z":
            cx, cy = sx, sy
            continue
        if up == "H":
            cx = ox + p[0]
            pts.append((cx, cy))
            continue
        if up == "V":
            cy = oy + p[0]
            pts.append((cx, cy))
            continue
        if up == "A":
            cx, cy = ox + p[5], oy + p[6]
            pts.append((cx, cy))
            continue
        for i in range(0, len(p), 2):
            pts.append((ox + p[i], oy + p[i + 1]))
        cx, cy = pts[-1]
        if up == "M":
            sx, sy = cx, cy
    return pts


def max_abs_numeric(doc: SvgDocument) -> float:
    """Largest magnitude the canvas bound must hold for ``doc``.

    Covers absolute (resolved) path positions, the raw literals themselves
    (relative offsets and arc radii included; arc rotation and flags are not
    lengths and are excluded), stroke widths, width/height, and the viewBox
    entries and far edges.
    """
    vx, vy, vw, vh = doc.view_box
    vals = [abs(doc.width), abs(doc.height), abs(vx), abs(vy), abs(vw), abs(vh),
            abs(vx + vw), abs(vy + vh)]
    for path in doc.paths:
        if "stroke-width" in path.attributes:
            vals.append(abs(path.attributes["stroke-width"]))
        for cmd in path.commands:
            vals.extend(abs(v) for v in _scalable(cmd))
        for x, y in absolute_points(path.commands):
            vals.append(abs(x))
            vals.append(abs(y))
    return max(vals)


def _scale_command(cmd: PathCommand, s: float) -> PathCommand:
    if cmd.opcode in "Aa":
        p = cmd.params
        return PathCommand(cmd.opcode, (p[0] * s, p[1] * s, p[2], p[3], p[4], p[5] * s, p[6] * s))
    return PathCommand(cmd.opcode, tuple(v * s for v in cmd.params))


def apply_scale(doc: SvgDocument, s: float) -> SvgDocument:
    if not s > 0:
        raise ValueError("scale factor must be > 0")
    paths = []
    for path in doc.paths:
        attrs = dict(path.attributes)
        if "stroke-width" in attrs:
            attrs["stroke-width"] *= s
        paths.append(PathElement([_scale_command(c, s) for c in path.commands], attrs))
    return SvgDocument(
        doc.width * s,
        doc.height * s,
        tuple(v * s for v in doc.view_box),
        paths,
        doc.default_fill,
    )


def normalize_to_canvas(doc: SvgDocument, cfg: CanvasConfig) -> tuple[SvgDocument, float]:
    peak = max_abs_numeric(doc)
    if peak == 0:
        raise DegenerateDocument("every numeric in the document is zero")
    s = cfg.M / peak
    if s == 1.0:
        return doc, 1.0
    return apply_scale(doc, s), s


def round_document(doc: SvgDocument, precision: int) -> SvgDocument:
    return map_numbers(doc, [round_half_away(v, precision) for v in document_numbers(doc)])


def default_renderer(cfg: CanvasConfig) -> Callable:
    from .raster import rasterize

    def render(doc):
        return rasterize(doc, cfg.render_size, cfg.render_size)

    return render


def filter_check(
    original: SvgDocument,
    normalized: SvgDocument,
    cfg: CanvasConfig,
    renderer: Optional[Callable] = None,
) -> FilterVerdict:
    from .metrics import ssim

    if renderer is None:
        renderer = default_renderer(cfg)
    try:
        final = round_document(normalized, cfg.precision)
    except SvgNumError:
        return FilterVerdict(False, Reason.PARSE_FAILURE)
    literal_peak = max(abs(v) for v in document_numbers(final))
    geometric_peak = max_abs_numeric(normalized)
    peak = max(literal_peak, geometric_peak)
    if literal_peak > cfg.M or geometric_peak > cfg.M + cfg.rounding_slack:
        return FilterVerdict(False, Reason.OUT_OF_BOUNDS, max_abs_value=peak)
    try:
        a = renderer(original)
        b = renderer(final)
        score = ssim(a, b)
    except SvgNumError:
        return FilterVerdict(False, Reason.PARSE_FAILURE, max_abs_value=peak)
    if not math.isfinite(score) or score < cfg.ssim_threshold:
        return FilterVerdict(False, Reason.LOW_SSIM, ssim=score, max_abs_value=peak)
    return FilterVerdict(True, Reason.OK, ssim=score, max_abs_value=peak)
