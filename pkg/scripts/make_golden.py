"""Regenerate tests/golden/: the two-row example document, its SVGFloat
encodings at every width, and annotated hex dumps.

    python scripts/make_golden.py [--out tests/golden]
"""
from __future__ import annotations

import argparse
from pathlib import Path

from svgnum.svg_core import parse_svg, serialize_svg
from svgnum.svgfloat import FloatKind, encode, hexdump

EXAMPLE = (
    '<svg width="100" height="100" viewBox="0 0 1024 1024" fill="black">'
    '<path d="M 288.453 128.219 h 608.872 L 736.109 384.556 l 160.034 256.891 '
    'H 288.453 v 320.745 h -96.128 V 64.337 h 96.000 v 64.000 z"/></svg>'
)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("tests/golden"))
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    doc = parse_svg(EXAMPLE)
    (args.out / "example.svg").write_text(serialize_svg(doc))
    for kind in FloatKind:
        blob = encode(doc, kind)
        stem = f"example.{kind.name.lower()}"
        (args.out / f"{stem}.svgf").write_bytes(blob)
        (args.out / f"{stem}.hex").write_text(hexdump(blob))
    print(f"wrote golden fixtures to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
