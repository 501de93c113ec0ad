"""Regenerate the shipped desk corpus and the out-of-bound fixtures.

    python scripts/make_desk_corpus.py [--out corpus/desk] [--count 200] [--seed 20240]

Output is a pure function of (count, seed): every file is canonical SVG whose
numerics carry 3 decimals and stay within [-512, 512].
"""
from __future__ import annotations

import argparse
import math
import random
from pathlib import Path

from svgnum.svg_core import PathCommand, PathElement, SvgDocument, serialize_svg

PALETTE = ["black", "#222", "#444", "gray", "#666", "rgb(30,30,30)", "#111111", "dimgray",
           "darkgray", "#333"]
SIZE = 512.0


def r3(x: float) -> float:
    return round(x, 3)


class ShapeMaker:
    def __init__(self, rng: random.Random, lo: float, hi: float):
        self.rng = rng
        self.lo, self.hi = lo, hi

    def pt(self, margin: float = 8.0):
        u = self.rng.uniform
        return r3(u(self.lo + margin, self.hi - margin)), r3(u(self.lo + margin, self.hi - margin))

    def clamp(self, v: float) -> float:
        return r3(min(self.hi - 1, max(self.lo + 1, v)))

    def polygon(self):
        rng = self.rng
        cx, cy = self.pt(80)
        n = rng.randint(5, 12)
        cmds = []
        for i in range(n):
            a = 2 * math.pi * i / n + rng.uniform(-0.2, 0.2)
            rad = rng.uniform(20, 75)
            x, y = self.clamp(cx + rad * math.cos(a)), self.clamp(cy + rad * math.sin(a))
            cmds.append(PathCommand("M" if i == 0 else "L", (x, y)))
        cmds.append(PathCommand("Z", ()))
        return cmds

    def blob(self):
        """Closed outline of absolute cubic and smooth-cubic segments."""
        rng = self.rng
        cx, cy = self.pt(90)
        n = rng.randint(4, 8)
        ring = []
        for i in range(n):
            a = 2 * math.pi * i / n
            rad = rng.uniform(30, 80)
            ring.append((cx + rad * math.cos(a), cy + rad * math.sin(a)))
        cmds = [PathCommand("M", (self.clamp(ring[0][0]), self.clamp(ring[0][1])))]
        for i in range(1, n + 1):
            x, y = ring[i % n]
            px, py = ring[i - 1]
            c1 = (self.clamp(px + rng.uniform(-25, 25)), self.clamp(py + rng.uniform(-25, 25)))
            c2 = (self.clamp(x + rng.uniform(-25, 25)), self.clamp(y + rng.uniform(-25, 25)))
            end = (self.clamp(x), self.clamp(y))
            if i > 1 and rng.random() < 0.4:
                cmds.append(PathCommand("S", c2 + end))
            else:
                cmds.append(PathCommand("C", c1 + c2 + end))
        cmds.append(PathCommand("Z", ()))
        return cmds

    def relative_wave(self):
        """Open stroke built from relative quadratic / smooth-quadratic steps."""
        rng = self.rng
        x, y = self.pt(60)
        cmds = [PathCommand("M", (x, y))]
        budget_x = (self.hi - 10) - x
        steps = rng.randint(4, 9)
        dx = max(budget_x / steps, 4.0)
        for i in range(steps):
            amp = rng.uniform(-30, 30)
            if i and rng.random() < 0.5:
                cmds.append(PathCommand("t", (r3(dx), r3(rng.uniform(-3, 3)))))
            else:
                cmds.append(PathCommand("q", (r3(dx / 2), r3(amp), r3(dx), r3(rng.uniform(-3, 3)))))
        return cmds

    def frame(self):
        """Rectangle with a rectangular hole: H/V segments, relative forms, evenodd."""
        rng = self.rng
        x, y = self.pt(120)
        w, h = r3(rng.uniform(40, 110)), r3(rng.uniform(40, 110))
        inset = r3(rng.uniform(6, min(w, h) / 3))
        cmds = [
            PathCommand("M", (x, y)),
            PathCommand("H", (r3(x + w),)),
            PathCommand("V", (r3(y + h),)),
            PathCommand("H", (x,)),
            PathCommand("Z", ()),
            PathCommand("m", (inset, inset)),
            PathCommand("h", (r3(w - 2 * inset),)),
            PathCommand("v", (r3(h - 2 * inset),)),
            PathCommand("h", (r3(-(w - 2 * inset)),)),
            PathCommand("z", ()),
        ]
        return cmds

    def arc_badge(self):
        rng = self.rng
        x, y = self.pt(100)
        rx, ry = r3(rng.uniform(20, 60)), r3(rng.uniform(15, 50))
        rot = r3(rng.uniform(0, 90))
        dx = r3(rng.uniform(30, 80))
        dy = r3(rng.uniform(-20, 20))
        return [
            PathCommand("M", (x, y)),
            PathCommand("a", (rx, ry, rot, float(rng.random() < 0.5), 1.0, dx, dy)),
            PathCommand("l", (r3(rng.uniform(-10, 10)), r3(rng.uniform(10, 30)))),
            PathCommand("A", (rx, ry, rot, 0.0, 0.0, x, y)),
            PathCommand("Z", ()),
        ]


def make_document(rng: random.Random) -> SvgDocument:
    centered = rng.random() < 0.3
    lo, hi = (-SIZE / 2, SIZE / 2) if centered else (0.0, SIZE)
    shapes = ShapeMaker(rng, lo, hi)
    makers = [shapes.polygon, shapes.blob, shapes.relative_wave, shapes.frame, shapes.arc_badge]
    paths = []
    for _ in range(rng.randint(3, 7)):
        maker = rng.choice(makers)
        cmds = maker()
        attrs = {}
        if maker == shapes.relative_wave:
            attrs = {"fill": "none", "stroke": rng.choice(PALETTE), "stroke-width": r3(rng.uniform(2, 9))}
        else:
            attrs["fill"] = rng.choice(PALETTE)
            if maker == shapes.frame:
                attrs["fill-rule"] = "evenodd"
            if rng.random() < 0.2:
                attrs["stroke"] = rng.choice(PALETTE)
                attrs["stroke-width"] = r3(rng.uniform(1, 4))
        paths.append(PathElement(cmds, attrs))
    return SvgDocument(SIZE, SIZE, (lo, lo, SIZE, SIZE), paths)


def out_of_bound_documents(M: float = 512.0) -> dict:
    """Documents that no global rescale can bring inside [-M, M]: an arc rotation
    is an angle, so it is not scaled and keeps its magnitude."""
    docs = {}
    for i, rot in enumerate((600.0, 725.5, 1080.25)):
        cmds = [
            PathCommand("M", (100.0, 100.0)),
            PathCommand("A", (80.0, 40.0, rot, 0.0, 1.0, 300.0, 260.0)),
            PathCommand("Z", ()),
        ]
        docs[f"oob_arc_rotation_{i}.svg"] = SvgDocument(
            SIZE, SIZE, (0.0, 0.0, SIZE, SIZE), [PathElement(cmds, {"fill": "black"})]
        )
    return docs


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("corpus/desk"))
    ap.add_argument("--oob-out", type=Path, default=Path("tests/fixtures/out_of_bounds"))
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--seed", type=int, default=20240)
    args = ap.parse_args(argv)
    rng = random.Random(args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    for i in range(args.count):
        (args.out / f"desk_{i:03d}.svg").write_text(serialize_svg(make_document(rng)))
    args.oob_out.mkdir(parents=True, exist_ok=True)
    for name, doc in out_of_bound_documents().items():
        (args.oob_out / name).write_text(serialize_svg(doc))
    print(f"wrote {args.count} documents to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
