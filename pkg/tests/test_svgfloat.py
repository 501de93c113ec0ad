import re

import ml_dtypes
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from svgnum.errors import (
    BadMagic,
    InvalidOpcode,
    MalformedStream,
    NonCanonicalStream,
    NonFiniteValue,
    SignalingValue,
    StrayNaN,
    SvgNumError,
    TruncatedBlock,
    UnknownOpcode,
    UnsupportedVersion,
    ValueOverflow,
)
from svgnum.svg_core import OPCODES, PathCommand, PathElement, SvgDocument, document_numbers, parse_svg, serialize_svg
from svgnum.svgfloat import (
    FloatKind,
    annotate,
    compression_report,
    decode,
    decode_parts,
    encode,
    fidelity_report,
    from_bits,
    hexdump,
    nan_box,
    nan_unbox,
    quantize,
    raw_deflate,
    read_uleb128,
    to_bits,
    uleb128,
)

from conftest import GOLDEN_DIR, svg_doc

KINDS = list(FloatKind)


# ---------------------------------------------------------------- oracles

# (exponent field mask, mantissa width, sign bit) straight from the IEEE-754 / bfloat16 layouts
BIT_FIELDS = {
    FloatKind.F32: (0xFF << 23, 23, 1 << 31),
    FloatKind.F16: (0x1F << 10, 10, 1 << 15),
    FloatKind.BF16: (0xFF << 7, 7, 1 << 15),
}


def boxed_oracle(opcode: str, kind: FloatKind) -> int:
    exp, _, _ = BIT_FIELDS[kind]
    return exp + ord(opcode)


def _finite_table(kind: FloatKind):
    """Every finite half-width pattern and its exact value."""
    patterns = np.arange(1 << 16, dtype=np.uint32).astype(np.uint16)
    if kind is FloatKind.F16:
        values = patterns.view(np.float16).astype(np.float64)
    else:
        with np.errstate(invalid="ignore"):
            values = patterns.view(ml_dtypes.bfloat16).astype(np.float64)
    keep = np.isfinite(values)
    return patterns[keep], values[keep]


_TABLES = {k: _finite_table(k) for k in (FloatKind.F16, FloatKind.BF16)}


def nearest_even_oracle(x: float, kind: FloatKind) -> float:
    """Brute-force round-to-nearest-even over the full 16-bit pattern table."""
    patterns, values = _TABLES[kind]
    dist = np.abs(values - x)
    best = dist.min()
    ties = np.flatnonzero(dist == best)
    if len(ties) > 1:
        even = [i for i in ties if patterns[i] & 1 == 0]
        ties = even or ties
    return float(values[ties[0]])


def size_oracle(doc: SvgDocument, kind: FloatKind) -> int:
    """Byte count from the canonical text alone: numeric attribute values become blocks."""
    text = serialize_svg(doc)
    total = 6
    pos = 0
    for m in re.finditer(r'(?<![\w-])(width|height|viewBox|stroke-width|d)="([^"]*)"', text):
        total += m.start(2) - pos
        pos = m.end(2)
        content = m.group(2)
        slots = len(re.findall(r"[A-Za-z]", content)) + len(re.findall(r"-?\d+(?:\.\d+)?", content))
        total += 1 + len(uleb128_oracle(slots)) + slots * kind.width
    return total + len(text) - pos


def uleb128_oracle(n: int) -> bytes:
    groups = []
    while True:
        groups.append(n % 128)
        n //= 128
        if n == 0:
            break
    return bytes([g + 128 for g in groups[:-1]] + [groups[-1]])


# ---------------------------------------------------------------- NaN boxing


def test_nan_box_examples():
    assert nan_box("M", FloatKind.F16) == 0x7C4D
    assert nan_box("M", FloatKind.F32) == 0x7F80004D
    assert nan_box("M", FloatKind.BF16) == 0x7FCD


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("opcode", sorted(OPCODES))
def test_nan_box_all_sixty_cases(opcode, kind):
    bits = nan_box(opcode, kind)
    assert bits == boxed_oracle(opcode, kind)
    exp, mant_bits, sign = BIT_FIELDS[kind]
    assert bits & exp == exp and bits & ((1 << mant_bits) - 1) != 0 and not bits & sign
    assert nan_unbox(bits, kind) == opcode


def test_twenty_opcodes():
    assert len(OPCODES) == 20 and all(65 <= ord(c) <= 122 for c in OPCODES)


@pytest.mark.parametrize("bad", ["X", "", "MM", 77, None])
def test_nan_box_rejects_non_opcodes(bad):
    with pytest.raises(InvalidOpcode):
        nan_box(bad, FloatKind.F16)


def test_nan_unbox_values_and_errors():
    assert nan_unbox(0x3C00, FloatKind.F16) == 1.0
    assert nan_unbox(0x3F800000, FloatKind.F32) == 1.0
    assert nan_unbox(0x3F80, FloatKind.BF16) == 1.0
    with pytest.raises(UnknownOpcode):
        nan_unbox(0x7C00 | ord("X"), FloatKind.F16)
    with pytest.raises(UnknownOpcode):
        nan_unbox(0x7E00, FloatKind.F16)  # canonical quiet NaN carries no opcode
    with pytest.raises(StrayNaN):
        nan_unbox(0xFC4D, FloatKind.F16)
    with pytest.raises(NonFiniteValue):
        nan_unbox(0x7C00, FloatKind.F16)
    with pytest.raises(SignalingValue):
        nan_unbox(0x7C4D, FloatKind.F16, value_only=True)
    with pytest.raises(MalformedStream):
        nan_unbox(0x10000, FloatKind.F16)


# ---------------------------------------------------------------- value conversion


@pytest.mark.parametrize("kind", [FloatKind.F16, FloatKind.BF16])
def test_conversion_matches_brute_force_nearest(kind):
    rng = np.random.default_rng(11)
    xs = np.concatenate([
        rng.uniform(-600, 600, 400),
        np.round(rng.uniform(-512, 512, 400), 3),
        rng.uniform(-1e-6, 1e-6, 50),          # subnormal territory for F16
        [0.0, -0.0, 288.453, 2049.0, 2051.0],  # F16 ties at spacing 2 go to even
    ])
    got = quantize(xs, kind)
    for x, g in zip(xs, got):
        assert g == nearest_even_oracle(float(x), kind), x


@settings(max_examples=300, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False, width=32))
def test_bf16_matches_ml_dtypes(x):
    # from float32 input the ml_dtypes cast is a single RNE step
    ref = np.float32(x).astype(ml_dtypes.bfloat16)
    if not np.isfinite(ref.astype(np.float64)):
        with pytest.raises(ValueOverflow):
            to_bits([x], FloatKind.BF16)
    else:
        want = int(np.array([ref]).view(np.uint16)[0])
        assert int(to_bits([x], FloatKind.BF16)[0]) == (0 if want == 0x8000 else want)


def test_negative_zero_has_no_sign_bit():
    for kind in KINDS:
        assert to_bits([-0.0, -1e-50], kind).tolist() == [0, 0]


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=-1e6, max_value=1e6, allow_nan=False))
def test_f32_within_half_ulp(x):
    q = float(quantize([x], FloatKind.F32)[0])
    assert abs(q - x) <= 0.5 * float(np.spacing(np.float32(abs(x))))


@pytest.mark.parametrize("kind, value", [
    (FloatKind.F16, 65520.0), (FloatKind.F16, -1e6), (FloatKind.F32, 1e39), (FloatKind.BF16, 3.4e38),
])
def test_overflow_is_rejected(kind, value):
    with pytest.raises(ValueOverflow):
        to_bits([value], kind)


def test_f16_largest_finite_kept():
    assert quantize([65504.0, 65519.0], FloatKind.F16).tolist() == [65504.0, 65504.0]


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), -float("inf")])
def test_non_finite_rejected(bad):
    with pytest.raises(NonFiniteValue):
        to_bits([1.0, bad], FloatKind.F32)


def test_value_slots_are_never_nan():
    for kind in KINDS:
        assert np.isfinite(from_bits(to_bits(np.linspace(-500, 500, 1001), kind), kind)).all()


# ---------------------------------------------------------------- LEB128


@pytest.mark.parametrize("n", [0, 1, 127, 128, 300, 16384, 2 ** 35 + 7])
def test_uleb128_matches_oracle(n):
    raw = uleb128(n)
    assert raw == uleb128_oracle(n)
    assert read_uleb128(raw + b"\xff", 0) == (n, len(raw))


def test_uleb128_truncation():
    with pytest.raises(TruncatedBlock):
        read_uleb128(b"\x80\x80", 0)


# ---------------------------------------------------------------- golden fixtures


@pytest.mark.parametrize("kind", KINDS)
def test_golden_bytes_are_reproduced(kind, example_doc):
    name = kind.name.lower()
    golden = (GOLDEN_DIR / f"example.{name}.svgf").read_bytes()
    assert encode(example_doc, kind) == golden
    assert hexdump(golden) == (GOLDEN_DIR / f"example.{name}.hex").read_text()


def test_golden_source_matches_example(example_doc):
    assert parse_svg((GOLDEN_DIR / "example.svg").read_text()) == example_doc


@pytest.mark.parametrize("kind", KINDS)
def test_golden_decodes_to_quantized_example(kind, example_doc):
    doc = decode((GOLDEN_DIR / f"example.{kind.name.lower()}.svgf").read_bytes())
    want = quantize(document_numbers(example_doc), kind)
    assert document_numbers(doc) == pytest.approx(list(want), abs=0)
    assert [c.opcode for c in doc.paths[0].commands] == [c.opcode for c in example_doc.paths[0].commands]


def test_example_path_block_at_f16(example_doc):
    _, parts = decode_parts(encode(example_doc, FloatKind.F16))
    blocks = [p for p in parts if not isinstance(p, str)]
    path_block = blocks[-1]
    # 11 opcodes + 13 values; each 7-char literal becomes one 2-byte slot
    assert len(path_block) == 24
    assert sum(isinstance(x, str) for x in path_block) == 11
    data = encode(example_doc, FloatKind.F16)
    start = data.index(b'd="') + 3
    assert data[start:start + 2] == b"\x00\x18"
    assert data[start + 2:start + 4] == (0x7C4D).to_bytes(2, "little")


def test_header_layout(example_doc):
    for kind in KINDS:
        data = encode(example_doc, kind)
        assert data[:4] == b"SVGF" and data[4] == 1 and data[5] == int(kind)


# ---------------------------------------------------------------- size accounting


def test_size_oracle_on_example(example_doc):
    for kind in KINDS:
        assert len(encode(example_doc, kind)) == size_oracle(example_doc, kind)
    assert len(encode(example_doc, FloatKind.F16)) == 178


def test_size_accounting_on_corpus(corpus):
    for doc in corpus[:40]:
        for kind in KINDS:
            assert len(encode(doc, kind)) == size_oracle(doc, kind)


def test_document_without_numerics_is_header_plus_ascii():
    from svgnum.svgfloat import encode_segments
    from svgnum.svg_core import SYM

    data = encode_segments([(SYM, "<svg/>")], FloatKind.F16)
    assert data == b"SVGF\x01\x01<svg/>"


def test_empty_numeric_corpus_cannot_gain():
    # a lone zero-length path still carries numbers; the bound holds for the framing itself
    doc = parse_svg(svg_doc("M 0 0", size=1))
    rep = compression_report([doc], FloatKind.F32)
    assert rep["vs_raw"] <= 1.0


def test_long_literals_compress_at_f16():
    doc = parse_svg(svg_doc("M 123.456 234.567 L 345.678 456.789 L 111.111 222.222 Z", size=512))
    assert compression_report([doc], FloatKind.F16)["vs_raw"] > 1.0


def test_compression_report_fields(example_doc):
    rep = compression_report([example_doc, example_doc], FloatKind.F16, names=["a", "b"])
    raw = serialize_svg(example_doc).encode()
    assert rep["raw_bytes"] == 2 * len(raw)
    assert rep["deflate_bytes"] == 2 * len(raw_deflate(raw))
    assert rep["vs_raw"] == pytest.approx(len(raw) / 178)
    assert [r["file"] for r in rep["per_file"]] == ["a", "b"]
    with pytest.raises(ValueError):
        compression_report([], FloatKind.F16)


def test_raw_deflate_is_headerless():
    import zlib

    data = b"abcabcabc" * 20
    assert zlib.decompress(raw_deflate(data), -15) == data


# ---------------------------------------------------------------- decode errors


def test_decode_errors(example_doc):
    good = encode(example_doc, FloatKind.F16)
    with pytest.raises(BadMagic):
        decode(b"SVGX" + good[4:])
    with pytest.raises(BadMagic):
        decode(b"SVG")
    with pytest.raises(UnsupportedVersion):
        decode(good[:4] + b"\x02" + good[5:])
    with pytest.raises(MalformedStream):
        decode(good[:5] + b"\x07" + good[6:])
    cut = good.index(b"\x00\x18") + 2
    with pytest.raises(TruncatedBlock):
        decode(good[:cut + 10])
    with pytest.raises(TruncatedBlock):
        decode(good[:cut - 1])


def test_decode_rejects_stray_and_unknown_nan(example_doc):
    good = bytearray(encode(example_doc, FloatKind.F16))
    op = good.index((0x7C4D).to_bytes(2, "little"))
    stray = good.copy()
    stray[op + 1] |= 0x80
    with pytest.raises(StrayNaN):
        decode(bytes(stray))
    unknown = good.copy()
    unknown[op] = ord("X")
    with pytest.raises(UnknownOpcode):
        decode(bytes(unknown))


def test_opcode_in_attribute_block_is_signaling(example_doc):
    good = bytearray(encode(example_doc, FloatKind.F16))
    width_slot = good.index(b"\x00\x01") + 2
    good[width_slot:width_slot + 2] = (0x7C4D).to_bytes(2, "little")
    with pytest.raises(SignalingValue):
        decode(bytes(good))


def test_non_canonical_stream_rejected(example_doc):
    good = encode(example_doc, FloatKind.F16)
    # negative zero encodes differently from the canonical +0
    i = good.index(b"\x00\x04") + 2
    tweaked = good[:i] + b"\x00\x80" + good[i + 2:]
    with pytest.raises(NonCanonicalStream):
        decode(tweaked)


# ---------------------------------------------------------------- round trip and fuzzing

coord = st.floats(min_value=-512, max_value=512, allow_nan=False).map(lambda v: round(v, 3))


@st.composite
def documents(draw):
    from svgnum.svg_core import ARITY

    cmds = [PathCommand("M", (draw(coord), draw(coord)))]
    for _ in range(draw(st.integers(0, 12))):
        op = draw(st.sampled_from("LHVCSQTAZlhvcsqtaz"))
        if op in "Aa":
            r = st.floats(0, 512).map(lambda v: round(v, 3))
            params = (draw(r), draw(r), draw(coord), draw(st.sampled_from([0, 1])),
                      draw(st.sampled_from([0, 1])), draw(coord), draw(coord))
        else:
            params = tuple(draw(coord) for _ in range(ARITY[op.upper()]))
        cmds.append(PathCommand(op, params))
    attrs = {"stroke-width": draw(st.floats(0, 10).map(lambda v: round(v, 3)))} if draw(st.booleans()) else {}
    return SvgDocument(512, 512, (-256, -256, 512, 512), [PathElement(cmds, attrs)])


@settings(max_examples=300, deadline=None)
@given(documents(), st.sampled_from(KINDS))
def test_round_trip_is_quantization(doc, kind):
    back = decode(encode(doc, kind))
    assert document_numbers(back) == list(quantize(document_numbers(doc), kind))
    assert [c.opcode for p in back.paths for c in p.commands] == [c.opcode for p in doc.paths for c in p.commands]
    assert len(encode(doc, kind)) == size_oracle(doc, kind)


@settings(max_examples=300, deadline=None)
@given(documents())
def test_f32_round_trip_within_one_ulp(doc):
    back = decode(encode(doc, FloatKind.F32))
    for a, b in zip(document_numbers(back), document_numbers(doc)):
        assert abs(a - b) <= float(np.spacing(np.float32(abs(b))))


def test_re_encode_is_a_fixed_point(corpus):
    for doc in corpus[:30]:
        for kind in KINDS:
            data = encode(doc, kind)
            assert encode(decode(data), kind) == data


def mutate(data: bytes, rng) -> bytes:
    buf = bytearray(data)
    for _ in range(rng.integers(1, 4)):
        choice = rng.integers(0, 4)
        pos = int(rng.integers(0, len(buf)))
        if choice == 0:
            buf[pos] = int(rng.integers(0, 256))
        elif choice == 1:
            buf[pos] ^= 1 << int(rng.integers(0, 8))
        elif choice == 2 and len(buf) > 7:
            del buf[pos]
        else:
            buf.insert(pos, int(rng.integers(0, 256)))
    return bytes(buf)


def test_fuzzed_streams_fail_typed_or_decode_faithfully(example_doc, corpus):
    rng = np.random.default_rng(5)
    seeds = [encode(d, k) for d in [example_doc, *corpus[:5]] for k in KINDS]
    decoded = 0
    for i in range(3000):
        data = mutate(seeds[i % len(seeds)], rng)
        try:
            doc = decode(data)
        except SvgNumError:
            continue
        decoded += 1
        assert encode(doc, FloatKind(data[5])) == data
    assert decoded > 0


# ---------------------------------------------------------------- inspection


def test_annotate_covers_every_byte(example_doc):
    data = encode(example_doc, FloatKind.BF16)
    rows = annotate(data)
    assert b"".join(raw for _, raw, _ in rows) == data
    assert [off for off, _, _ in rows] == list(np.cumsum([0] + [len(r) for _, r, _ in rows[:-1]]))
    labels = [label for _, _, label in rows]
    assert labels[:3] == ["magic 'SVGF'", "version 1", "float kind BF16"]
    assert "opcode 'z' (NaN-boxed)" in labels


def test_fidelity_of_small_integer_document_is_exact():
    doc = parse_svg(svg_doc("M 4 4 L 60 8 L 30 60 Z", size=64))
    for kind in KINDS:
        rep = fidelity_report([doc], kind, size=64)
        assert rep["mean_ssim"] == pytest.approx(1.0, abs=1e-12)
