"""SVGFloat: SVG text with every numeric stored as a fixed-width binary float.

Layout::

    header   "SVGF" | version (1) | float kind (0=F32, 1=F16, 2=BF16)
    body     ASCII runs interleaved with binary blocks
    block    0x00 | ULEB128 slot count N >= 1 | N little-endian slots

ASCII runs are the canonical serializer's structural text and never contain
0x00.  Inside a path's ``d`` attribute the block interleaves opcode slots and
value slots; an opcode slot is a positive NaN whose mantissa holds the
opcode's ASCII code.  All other blocks (width, height, viewBox, stroke-width)
hold value slots only.

Decoding is strict: a stream is accepted only if re-encoding the decoded
document reproduces it byte for byte.
"""
from __future__ import annotations

import enum
import zlib
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    BadMagic,
    InvalidOpcode,
    MalformedStream,
    NonCanonicalStream,
    NonFiniteValue,
    SignalingValue,
    StrayNaN,
    TruncatedBlock,
    UnknownOpcode,
    UnsupportedVersion,
    ValueOverflow,
)
from .svg_core import NUM, OP, OPCODES, SYM, SvgDocument, arity, document_segments, parse_svg, serialize_svg

MAGIC = b"SVGF"
VERSION = 1
HEADER_SIZE = 6
SENTINEL = 0x00


@dataclass(frozen=True)
class _Layout:
    width: int
    sign: int
    exp: int
    mant: int
    uint: type


class FloatKind(enum.IntEnum):
    F32 = 0
    F16 = 1
    BF16 = 2

    @property
    def layout(self) -> _Layout:
        return _LAYOUTS[self]

    @property
    def width(self) -> int:
        return self.layout.width


_LAYOUTS = {
    FloatKind.F32: _Layout(4, 0x80000000, 0x7F800000, 0x007FFFFF, np.uint32),
    FloatKind.F16: _Layout(2, 0x8000, 0x7C00, 0x03FF, np.uint16),
    FloatKind.BF16: _Layout(2, 0x8000, 0x7F80, 0x007F, np.uint16),
}

_BF16_MAX = (2.0 - 2.0 ** -7) * 2.0 ** 127


# --------------------------------------------------------------------------
# NaN boxing


def nan_box(opcode: str, kind: FloatKind) -> int:
    if not isinstance(opcode, str) or opcode not in OPCODES:
        raise InvalidOpcode(f"{opcode!r} is not a path opcode")
    return kind.layout.exp | ord(opcode)


def nan_unbox(bits: int, kind: FloatKind, *, value_only: bool = False):
    """Decode one slot: a float for value slots, the opcode letter for boxed NaNs."""
    lay = kind.layout
    bits = int(bits)
    if bits < 0 or bits >> (8 * lay.width):
        raise MalformedStream(f"slot {bits:#x} wider than {lay.width} bytes")
    if bits & lay.exp == lay.exp:
        mant = bits & lay.mant
        if mant == 0:
            raise NonFiniteValue("infinite value slot")
        if bits & lay.sign:
            raise StrayNaN(f"negative NaN slot {bits:#x}")
        if mant > 0x7F or chr(mant) not in OPCODES:
            raise UnknownOpcode(f"NaN payload {mant:#x} is not an opcode")
        if value_only:
            raise SignalingValue(f"opcode {chr(mant)!r} where a value is required")
        return chr(mant)
    return float(from_bits(np.array([bits], dtype=lay.uint), kind)[0])


# --------------------------------------------------------------------------
# value conversion (round to nearest even)


def _round_bf16(x: np.ndarray) -> np.ndarray:
    _, e = np.frexp(x)
    q_exp = np.maximum(e, -125) - 8  # 8 significant bits; subnormal spacing 2**-133
    return np.ldexp(np.rint(np.ldexp(x, -q_exp)), q_exp)


def to_bits(values, kind: FloatKind) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64)
    if not np.isfinite(x).all():
        raise NonFiniteValue("SVGFloat cannot store NaN or infinity")
    with np.errstate(over="ignore"):
        if kind is FloatKind.F32:
            y = x.astype(np.float32)
            bits = y.view(np.uint32)
        elif kind is FloatKind.F16:
            y = x.astype(np.float16)
            bits = y.view(np.uint16)
        else:
            r = _round_bf16(x)
            if (np.abs(r) > _BF16_MAX).any():
                raise ValueOverflow("value exceeds the bfloat16 range")
            y = r.astype(np.float32)
            bits = (y.view(np.uint32) >> 16).astype(np.uint16)
    if not np.isfinite(y).all():
        bad = x[~np.isfinite(y)][0]
        raise ValueOverflow(f"{bad!r} exceeds the {kind.name} range")
    # zero has one canonical pattern; underflow to -0 must not leak a sign bit
    bits[y == 0] = 0
    return bits


def from_bits(bits, kind: FloatKind) -> np.ndarray:
    b = np.asarray(bits)
    with np.errstate(invalid="ignore"):  # NaN-boxed opcodes pass through as NaN
        if kind is FloatKind.F32:
            return b.astype(np.uint32).view(np.float32).astype(np.float64)
        if kind is FloatKind.F16:
            return b.astype(np.uint16).view(np.float16).astype(np.float64)
        return (b.astype(np.uint32) << 16).view(np.float32).astype(np.float64)


def quantize(values, kind: FloatKind) -> np.ndarray:
    """Round-trip values through ``kind``."""
    return from_bits(to_bits(values, kind), kind)


# --------------------------------------------------------------------------
# LEB128


def uleb128(n: int) -> bytes:
    if n < 0:
        raise ValueError("ULEB128 encodes non-negative integers")
    out = bytearray()
    while True:
        byte = n & 0x7F
        n >>= 7
        if n:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def read_uleb128(data: bytes, pos: int) -> tuple[int, int]:
    value = shift = 0
    start = pos
    while True:
        if pos >= len(data):
            raise TruncatedBlock(f"slot count cut off at byte {start}")
        byte = data[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, pos
        shift += 7
        if shift > 63:
            raise MalformedStream(f"slot count at byte {start} is too long")


# --------------------------------------------------------------------------
# encoding


def _block(items: list, kind: FloatKind) -> bytes:
    lay = kind.layout
    values = [v for v in items if not isinstance(v, str)]
    vbits = iter(to_bits(values, kind).tolist()) if values else iter(())
    slots = np.empty(len(items), dtype=np.dtype(lay.uint).newbyteorder("<"))
    for i, item in enumerate(items):
        slots[i] = nan_box(item, kind) if isinstance(item, str) else next(vbits)
    return bytes([SENTINEL]) + uleb128(len(items)) + slots.tobytes()


def encode_segments(segments, kind: FloatKind) -> bytes:
    kind = FloatKind(kind)
    out = [MAGIC, bytes([VERSION, int(kind)])]
    text: list[str] = []
    atoms: list = []
    for seg_kind, value in segments:
        if seg_kind == SYM:
            if atoms:
                out.append(_block(atoms, kind))
                atoms = []
            text.append(value)
        else:
            if text:
                out.append(_ascii("".join(text)))
                text = []
            atoms.append(value)
    if atoms:
        out.append(_block(atoms, kind))
    if text:
        out.append(_ascii("".join(text)))
    return b"".join(out)


def _ascii(text: str) -> bytes:
    try:
        raw = text.encode("ascii")
    except UnicodeEncodeError:
        raise MalformedStream("structural text must be ASCII") from None
    if b"\x00" in raw:
        raise MalformedStream("structural text must not contain NUL")
    return raw


def encode(doc: SvgDocument, kind: FloatKind = FloatKind.F16) -> bytes:
    return encode_segments(document_segments(doc), kind)


# --------------------------------------------------------------------------
# decoding


def read_header(data: bytes) -> FloatKind:
    if len(data) < HEADER_SIZE or data[:4] != MAGIC:
        raise BadMagic("not an SVGFloat stream")
    if data[4] != VERSION:
        raise UnsupportedVersion(f"version {data[4]} (reader supports {VERSION})")
    if data[5] not in (0, 1, 2):
        raise MalformedStream(f"unknown float kind byte {data[5]}")
    return FloatKind(data[5])


def decode_parts(data: bytes) -> tuple[FloatKind, list]:
    """Split a stream into ASCII strings and decoded blocks (lists of float | opcode)."""
    data = bytes(data)
    kind = read_header(data)
    lay = kind.layout
    parts: list = []
    pos = HEADER_SIZE
    n = len(data)
    while pos < n:
        if data[pos] != SENTINEL:
            end = data.find(b"\x00", pos)
            end = n if end < 0 else end
            try:
                parts.append(data[pos:end].decode("ascii"))
            except UnicodeDecodeError:
                raise MalformedStream(f"non-ASCII byte in structural run at {pos}") from None
            pos = end
            continue
        count, pos = read_uleb128(data, pos + 1)
        if count == 0:
            raise MalformedStream(f"empty block before byte {pos}")
        size = count * lay.width
        if pos + size > n:
            raise TruncatedBlock(f"block of {count} slots needs {size} bytes, {n - pos} left")
        raw = np.frombuffer(data, dtype=np.dtype(lay.uint).newbyteorder("<"), count=count, offset=pos)
        pos += size
        prev = parts[-1] if parts and isinstance(parts[-1], str) else ""
        parts.append(_decode_block(raw, kind, path=prev.endswith(' d="')))
    return kind, parts


def _decode_block(raw: np.ndarray, kind: FloatKind, path: bool) -> list:
    lay = kind.layout
    bits = raw.astype(np.int64)
    is_special = (bits & lay.exp) == lay.exp
    values = from_bits(raw, kind)
    items: list = []
    expect = 0  # values still owed to the current opcode
    for i in range(len(bits)):
        if is_special[i]:
            op = nan_unbox(int(bits[i]), kind, value_only=not path)
            if expect:
                raise MalformedStream(f"opcode {op!r} arrived while {expect} values were pending")
            expect = arity(op)
            items.append(op)
        else:
            if path and not items:
                raise MalformedStream("path block must start with an opcode")
            if path and not expect:
                raise MalformedStream("value slot without an opcode owning it")
            expect = max(expect - 1, 0)
            items.append(float(values[i]))
    if expect:
        raise MalformedStream(f"block ended while {expect} values were pending")
    return items


def _literal(v) -> str:
    if isinstance(v, str):
        return v
    r = repr(v)
    return r[:-2] if r.endswith(".0") else r


def parts_to_text(parts: Sequence) -> str:
    out = []
    for part in parts:
        if isinstance(part, str):
            out.append(part)
        else:
            out.append(" ".join(_literal(v) for v in part))
    return "".join(out)


def decode(data: bytes) -> SvgDocument:
    kind, parts = decode_parts(data)
    doc = parse_svg(parts_to_text(parts))
    if encode(doc, kind) != bytes(data):
        raise NonCanonicalStream("stream is readable but not in canonical form")
    return doc


def file_kind(data: bytes) -> FloatKind:
    return read_header(data)


# --------------------------------------------------------------------------
# corpus reports


def raw_deflate(data: bytes) -> bytes:
    comp = zlib.compressobj(zlib.Z_DEFAULT_COMPRESSION, zlib.DEFLATED, -15)
    return comp.compress(data) + comp.flush()


def compression_report(
    corpus: Sequence[SvgDocument],
    kind: FloatKind,
    precision: int = 3,
    names: Optional[Sequence[str]] = None,
) -> dict:
    if not corpus:
        raise ValueError("corpus must be non-empty")
    kind = FloatKind(kind)
    names = list(names) if names is not None else [str(i) for i in range(len(corpus))]
    per_file = []
    tot_raw = tot_def = tot_svgf = 0
    for name, doc in zip(names, corpus):
        raw = serialize_svg(doc, precision).encode("ascii")
        n_raw, n_def, n_svgf = len(raw), len(raw_deflate(raw)), len(encode(doc, kind))
        tot_raw += n_raw
        tot_def += n_def
        tot_svgf += n_svgf
        per_file.append({"file": name, "raw": n_raw, "deflate": n_def, "svgf": n_svgf,
                         "vs_raw": n_raw / n_svgf, "vs_deflate": n_def / n_svgf})
    return {
        "kind": kind.name,
        "vs_raw": tot_raw / tot_svgf,
        "vs_deflate": tot_def / tot_svgf,
        "raw_bytes": tot_raw,
        "deflate_bytes": tot_def,
        "svgf_bytes": tot_svgf,
        "per_file": per_file,
    }


def fidelity_report(
    corpus: Sequence[SvgDocument],
    kind: FloatKind,
    renderer: Optional[Callable] = None,
    size: int = 256,
) -> dict:
    from .metrics import ssim
    from .raster import rasterize

    if renderer is None:
        def renderer(doc):
            return rasterize(doc, size, size)

    scores = []
    for doc in corpus:
        back = decode(encode(doc, kind))
        scores.append(ssim(renderer(doc), renderer(back)))
    return {"kind": FloatKind(kind).name, "mean_ssim": float(np.mean(scores)), "per_file": scores}


# --------------------------------------------------------------------------
# inspection


def annotate(data: bytes) -> list[tuple[int, bytes, str]]:
    """Walk a stream and label every region: ``(offset, raw bytes, description)``."""
    data = bytes(data)
    kind = read_header(data)
    width = kind.width
    rows = [(0, data[:4], "magic 'SVGF'"), (4, data[4:5], f"version {data[4]}"),
            (5, data[5:6], f"float kind {kind.name}")]
    _, parts = decode_parts(data)
    pos = HEADER_SIZE
    for part in parts:
        if isinstance(part, str):
            rows.append((pos, data[pos:pos + len(part)], f"ascii {part!r}"))
            pos += len(part)
            continue
        n, body = read_uleb128(data, pos + 1)
        rows.append((pos, data[pos:body], f"block sentinel, {n} slot{'s' if n != 1 else ''}"))
        pos = body
        for item in part:
            raw = data[pos:pos + width]
            label = f"opcode {item!r} (NaN-boxed)" if isinstance(item, str) else f"value {_literal(item)}"
            rows.append((pos, raw, label))
            pos += width
    return rows


def hexdump(data: bytes) -> str:
    """Annotated hex dump, 16 bytes per line; the label sits on a region's first line."""
    lines = []
    for off, raw, label in annotate(data):
        for i in range(0, max(len(raw), 1), 16):
            chunk = raw[i:i + 16]
            lines.append(f"{off + i:08x}  {chunk.hex(' '):<47}  {label if i == 0 else ''}".rstrip())
    return "\n".join(lines) + "\n"
