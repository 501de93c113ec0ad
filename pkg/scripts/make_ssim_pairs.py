"""Regenerate tests/fixtures/ssim_pairs/: ten 8-bit PGM image pairs.

Each pair is a desk-corpus render next to a render of the same document with
jittered coordinates; the jitter grows with the pair index, so the pairs span
near-identical to clearly different.  The last pair adds pixel noise instead.

    python scripts/make_ssim_pairs.py [--out tests/fixtures/ssim_pairs] [--size 96]
"""
from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from svgnum.raster import RasterImage, rasterize, write_pgm
from svgnum.svg_core import PathCommand, PathElement, SvgDocument, parse_svg

ROOT = Path(__file__).resolve().parent.parent
SEED = 31337


def jitter(doc: SvgDocument, sigma: float, rng) -> SvgDocument:
    paths = []
    for path in doc.paths:
        cmds = []
        for c in path.commands:
            params = list(c.params)
            for i in range(len(params)):
                if c.opcode in "Aa" and i in (2, 3, 4):
                    continue  # keep angle and flags
                params[i] += rng.normal(0.0, sigma)
                if c.opcode in "Aa" and i in (0, 1):
                    params[i] = abs(params[i])
            cmds.append(PathCommand(c.opcode, tuple(params)))
        paths.append(PathElement(cmds, path.attributes))
    return SvgDocument(doc.width, doc.height, doc.view_box, paths, doc.default_fill)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=ROOT / "tests" / "fixtures" / "ssim_pairs")
    ap.add_argument("--size", type=int, default=96)
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(SEED)
    files = sorted((ROOT / "corpus" / "desk").glob("*.svg"))
    for i in range(10):
        doc = parse_svg(files[i * 7].read_text())
        a = rasterize(doc, args.size, args.size)
        if i < 9:
            b = rasterize(jitter(doc, 0.5 + 2.0 * i, rng), args.size, args.size)
        else:
            noisy = np.clip(a.pixels + rng.normal(0, 0.1, a.pixels.shape), 0, 1)
            b = RasterImage.from_array(noisy)
        write_pgm(a, args.out / f"pair_{i:02d}_a.pgm")
        write_pgm(b, args.out / f"pair_{i:02d}_b.pgm")
    print(f"wrote 10 pairs to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
