"""Restricted SVG dialect: path-data grammar, document skeleton, canonical text.

The in-memory model is immutable.  Implicit command repetition is expanded
at parse time, so every :class:`PathCommand` carries exactly the number of
parameters its opcode requires.

Canonical serialization goes through a flat *segment* stream
(``(SYM, text)``, ``(OP, letter)``, ``(NUM, value)``).  The text serializer,
the dual-sequence decomposer, the tokenizer statistics and the SVGFloat
codec all consume that same stream, so they agree on number order and on
what counts as structure.
"""
from __future__ import annotations

import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Context, Decimal
from typing import Iterable, Sequence

from .errors import MalformedDocument, MalformedPath, UnsupportedFeature

ARITY = {"M": 2, "L": 2, "T": 2, "H": 1, "V": 1, "C": 6, "S": 4, "Q": 4, "A": 7, "Z": 0}
OPCODES = frozenset(ARITY) | frozenset(c.lower() for c in ARITY)

SVG_NS = "http://www.w3.org/2000/svg"
PATH_ATTRIBUTES = ("fill", "stroke", "stroke-width", "fill-rule")
FILL_RULES = ("nonzero", "evenodd")

SYM, OP, NUM = "sym", "op", "num"

_DECIMAL_CTX = Context(prec=800)
_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_SEPARATORS = " \t\r\n\f,"


def arity(opcode: str) -> int:
    return ARITY[opcode.upper()]


@dataclass(frozen=True)
class PathCommand:
    opcode: str
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if self.opcode not in OPCODES:
            raise MalformedPath(f"unknown opcode {self.opcode!r}")
        params = tuple(float(p) for p in self.params)
        object.__setattr__(self, "params", params)
        if len(params) != arity(self.opcode):
            raise MalformedPath(
                f"{self.opcode} takes {arity(self.opcode)} parameters, got {len(params)}"
            )
        if self.opcode in "Aa":
            if params[0] < 0 or params[1] < 0:
                raise MalformedPath("arc radii must be non-negative")
            if params[3] not in (0.0, 1.0) or params[4] not in (0.0, 1.0):
                raise MalformedPath("arc flags must be 0 or 1")

    @property
    def is_relative(self) -> bool:
        return self.opcode.islower()

    def __repr__(self):
        return f"{self.opcode}({', '.join(format(p, 'g') for p in self.params)})"


@dataclass(frozen=True)
class PathElement:
    commands: tuple[PathCommand, ...]
    attributes: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "commands", tuple(self.commands))
        if not self.commands or self.commands[0].opcode not in "Mm":
            raise MalformedDocument("path data must start with M or m")
        attrs = dict(self.attributes)
        for key in attrs:
            if key not in PATH_ATTRIBUTES:
                raise UnsupportedFeature(f"path@{key}")
        if "stroke-width" in attrs:
            attrs["stroke-width"] = float(attrs["stroke-width"])
            if not attrs["stroke-width"] >= 0:
                raise MalformedDocument("stroke-width must be >= 0")
        for key in ("fill", "stroke"):
            if key in attrs:
                parse_color(attrs[key])
        if attrs.get("fill-rule", "nonzero") not in FILL_RULES:
            raise UnsupportedFeature(f"fill-rule={attrs['fill-rule']}")
        object.__setattr__(self, "attributes", attrs)

    @property
    def fill_rule(self) -> str:
        return self.attributes.get("fill-rule", "nonzero")


@dataclass(frozen=True)
class SvgDocument:
    width: float
    height: float
    view_box: tuple[float, float, float, float]
    paths: tuple[PathElement, ...]
    default_fill: str = "black"

    def __post_init__(self):
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "height", float(self.height))
        vb = tuple(float(v) for v in self.view_box)
        if len(vb) != 4:
            raise MalformedDocument("viewBox needs 4 numbers")
        if not (vb[2] > 0 and vb[3] > 0):
            raise MalformedDocument("viewBox width and height must be > 0")
        object.__setattr__(self, "view_box", vb)
        object.__setattr__(self, "paths", tuple(self.paths))
        if not self.paths:
            raise MalformedDocument("document has no paths")
        parse_color(self.default_fill)


# --------------------------------------------------------------------------
# number formatting


def format_number(value: float, precision: int) -> str:
    """Fixed-point literal, half away from zero, trailing zeros stripped, never exponent form."""
    if not math.isfinite(value):
        raise ValueError(f"cannot format non-finite value {value!r}")
    quantum = Decimal(1).scaleb(-precision)
    d = Decimal(repr(float(value))).quantize(quantum, rounding=ROUND_HALF_UP, context=_DECIMAL_CTX)
    s = format(d, "f")
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    if s == "-0":
        s = "0"
    return s


def round_half_away(value: float, precision: int) -> float:
    return float(format_number(value, precision))


# --------------------------------------------------------------------------
# path data


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


def parse_path(d: str) -> list[PathCommand]:
    """Parse path data into explicit commands.

    >>> parse_path("M 0 0 10 10 20 0")
    [M(0, 0), L(10, 10), L(20, 0)]
    """
    n = len(d)
    pos = 0
    commands: list[PathCommand] = []

    def skip(p):
        while p < n and d[p] in _SEPARATORS:
            p += 1
        return p

    def at_number(p):
        return p < n and (d[p].isdigit() or d[p] in "+-.")

    def read_number(p):
        m = _NUMBER_RE.match(d, p)
        if m is None:
            raise MalformedPath("unparseable number", _byte_offset(d, p))
        value = float(m.group())
        if not math.isfinite(value):
            raise MalformedPath("number out of range", _byte_offset(d, p))
        return value, m.end()

    def read_flag(p):
        if p < n and d[p] in "01":
            return float(d[p]), p + 1
        raise MalformedPath("arc flag must be 0 or 1", _byte_offset(d, p))

    pos = skip(pos)
    while pos < n:
        ch = d[pos]
        if ch not in OPCODES:
            if at_number(pos):
                raise MalformedPath("number without a preceding command", _byte_offset(d, pos))
            raise MalformedPath(f"unknown opcode {ch!r}", _byte_offset(d, pos))
        opcode = ch
        pos = skip(pos + 1)
        k = arity(opcode)
        if k == 0:
            commands.append(PathCommand(opcode))
            if at_number(pos):
                raise MalformedPath("closepath takes no parameters", _byte_offset(d, pos))
            continue
        first = True
        while first or at_number(pos):
            params = []
            for i in range(k):
                if pos >= n:
                    raise MalformedPath(
                        f"{opcode} expects {k} parameters, input ended", _byte_offset(d, pos)
                    )
                if opcode in "Aa" and i in (3, 4):
                    value, pos = read_flag(pos)
                else:
                    if not at_number(pos):
                        raise MalformedPath(f"{opcode} expects {k} parameters", _byte_offset(d, pos))
                    value, pos = read_number(pos)
                params.append(value)
                pos = skip(pos)
            try:
                commands.append(PathCommand(opcode, tuple(params)))
            except MalformedPath as exc:
                raise MalformedPath(str(exc), _byte_offset(d, pos)) from None
            if first and opcode in "Mm":
                opcode = "L" if opcode == "M" else "l"
            first = False
    return commands


def path_segments(commands: Iterable[PathCommand]) -> list[tuple[str, object]]:
    segs: list[tuple[str, object]] = []
    for cmd in commands:
        segs.append((OP, cmd.opcode))
        segs.extend((NUM, p) for p in cmd.params)
    return segs


def _is_atom(seg) -> bool:
    return seg[0] in (OP, NUM)


def join_segments(segments: Sequence[tuple[str, object]], formatter) -> str:
    """Concatenate segments; adjacent opcode/number atoms get one space between them."""
    out = []
    prev_atom = False
    for kind, value in segments:
        atom = kind in (OP, NUM)
        if atom and prev_atom:
            out.append(" ")
        out.append(formatter(value) if kind == NUM else value)
        prev_atom = atom
    return "".join(out)


def serialize_path(commands: Sequence[PathCommand], precision: int = 3) -> str:
    return join_segments(path_segments(commands), lambda v: format_number(v, precision))


# --------------------------------------------------------------------------
# documents

_LENGTH_RE = re.compile(r"\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(px)?\s*$")


def _local(tag: str) -> str:
    if tag.startswith("{"):
        ns, _, name = tag[1:].partition("}")
        if ns != SVG_NS:
            raise UnsupportedFeature(tag)
        return name
    return tag


def _parse_length(text: str, what: str) -> float:
    m = _LENGTH_RE.match(text)
    if m is None:
        raise UnsupportedFeature(what, f"unsupported {what} value {text!r}")
    value = float(m.group(1))
    if not math.isfinite(value):
        raise MalformedDocument(f"{what} is not finite")
    return value


def _parse_view_box(text: str) -> tuple[float, ...]:
    parts = [p for p in re.split(r"[\s,]+", text.strip()) if p]
    if len(parts) != 4:
        raise MalformedDocument(f"viewBox needs 4 numbers, got {text!r}")
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise MalformedDocument(f"bad viewBox {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise MalformedDocument("viewBox is not finite")
    return vals


def parse_svg(text: str) -> SvgDocument:
    if "<!DOCTYPE" in text or "<!ENTITY" in text:
        raise UnsupportedFeature("DOCTYPE")
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise MalformedDocument(f"not well-formed: {exc}") from None
    if _local(root.tag) != "svg":
        raise MalformedDocument(f"root element is {root.tag!r}, expected svg")
    attrs = dict(root.attrib)
    for key in attrs:
        if key not in ("width", "height", "viewBox", "fill"):
            raise UnsupportedFeature(f"svg@{key}")
    if (root.text or "").strip():
        raise MalformedDocument("text content in svg element")

    view_box = _parse_view_box(attrs["viewBox"]) if "viewBox" in attrs else None
    width = _parse_length(attrs["width"], "width") if "width" in attrs else None
    height = _parse_length(attrs["height"], "height") if "height" in attrs else None
    if view_box is None:
        if width is None or height is None:
            raise MalformedDocument("need a viewBox or both width and height")
        view_box = (0.0, 0.0, width, height)
    if width is None:
        width = view_box[2]
    if height is None:
        height = view_box[3]
    default_fill = attrs.get("fill", "black")

    paths = []
    for child in root:
        name = _local(child.tag)
        if name != "path":
            raise UnsupportedFeature(name)
        if (child.text or "").strip() or (child.tail or "").strip() or len(child):
            raise MalformedDocument("unexpected content in path element")
        pattrs = {}
        d = None
        for key, value in child.attrib.items():
            if key == "d":
                d = value
            elif key in PATH_ATTRIBUTES:
                pattrs[key] = value
            else:
                raise UnsupportedFeature(f"path@{key}")
        if d is None:
            raise MalformedDocument("path without d attribute")
        if "stroke-width" in pattrs:
            pattrs["stroke-width"] = _parse_length(pattrs["stroke-width"], "stroke-width")
        paths.append(PathElement(parse_path(d), pattrs))
    return SvgDocument(width, height, view_box, paths, default_fill)


def document_segments(doc: SvgDocument) -> list[tuple[str, object]]:
    segs: list[tuple[str, object]] = [
        (SYM, "<svg"),
        (SYM, f' xmlns="{SVG_NS}"'),
        (SYM, ' width="'), (NUM, doc.width), (SYM, '"'),
        (SYM, ' height="'), (NUM, doc.height), (SYM, '"'),
        (SYM, ' viewBox="'),
    ]
    segs.extend((NUM, v) for v in doc.view_box)
    segs += [(SYM, '"'), (SYM, f' fill="{doc.default_fill}"'), (SYM, ">"), (SYM, "\n")]
    for path in doc.paths:
        segs += [(SYM, "<path"), (SYM, ' d="')]
        segs.extend(path_segments(path.commands))
        segs.append((SYM, '"'))
        for key in PATH_ATTRIBUTES:
            if key not in path.attributes:
                continue
            if key == "stroke-width":
                segs += [(SYM, ' stroke-width="'), (NUM, path.attributes[key]), (SYM, '"')]
            else:
                segs.append((SYM, f' {key}="{path.attributes[key]}"'))
        segs += [(SYM, "/>"), (SYM, "\n")]
    segs += [(SYM, "</svg>"), (SYM, "\n")]
    return segs


def serialize_svg(doc: SvgDocument, precision: int = 3) -> str:
    return join_segments(document_segments(doc), lambda v: format_number(v, precision))


def document_numbers(doc: SvgDocument) -> list[float]:
    """Every numeric literal of the canonical serialization, in order."""
    return [v for kind, v in document_segments(doc) if kind == NUM]


def map_numbers(doc: SvgDocument, values: Sequence[float]) -> SvgDocument:
    """Rebuild ``doc`` with its numerics replaced, in canonical order."""
    it = iter(values)
    width, height = next(it), next(it)
    view_box = tuple(next(it) for _ in range(4))
    paths = []
    for path in doc.paths:
        cmds = [PathCommand(c.opcode, tuple(next(it) for _ in c.params)) for c in path.commands]
        attrs = dict(path.attributes)
        if "stroke-width" in attrs:
            attrs["stroke-width"] = next(it)
        paths.append(PathElement(cmds, attrs))
    return SvgDocument(width, height, view_box, paths, doc.default_fill)


# --------------------------------------------------------------------------
# colors

NAMED_COLORS = {
    "black": (0, 0, 0),
    "white": (255, 255, 255),
    "red": (255, 0, 0),
    "green": (0, 128, 0),
    "lime": (0, 255, 0),
    "blue": (0, 0, 255),
    "yellow": (255, 255, 0),
    "cyan": (0, 255, 255),
    "magenta": (255, 0, 255),
    "gray": (128, 128, 128),
    "grey": (128, 128, 128),
    "silver": (192, 192, 192),
    "maroon": (128, 0, 0),
    "navy": (0, 0, 128),
    "olive": (128, 128, 0),
    "purple": (128, 0, 128),
    "teal": (0, 128, 128),
    "orange": (255, 165, 0),
    "darkgray": (169, 169, 169),
    "lightgray": (211, 211, 211),
    "dimgray": (105, 105, 105),
    "currentColor": (0, 0, 0),
}
_HEX_RE = re.compile(r"#([0-9a-fA-F]{3}|[0-9a-fA-F]{6})$")
_RGB_RE = re.compile(r"rgb\(\s*(\d{1,3})\s*,\s*(\d{1,3})\s*,\s*(\d{1,3})\s*\)$")


def parse_color(text: str):
    """Return an (r, g, b) tuple in 0..255, or None for ``none``."""
    t = text.strip()
    if t == "none":
        return None
    if t in NAMED_COLORS:
        return NAMED_COLORS[t]
    m = _HEX_RE.match(t)
    if m:
        h = m.group(1)
        if len(h) == 3:
            h = "".join(c * 2 for c in h)
        return tuple(int(h[i:i + 2], 16) for i in (0, 2, 4))
    m = _RGB_RE.match(t)
    if m and all(int(g) <= 255 for g in m.groups()):
        return tuple(int(g) for g in m.groups())
    raise UnsupportedFeature(f"color {text!r}")
