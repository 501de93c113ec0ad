from __future__ import annotations

from pathlib import Path

import pytest

from svgnum.svg_core import parse_svg

ROOT = Path(__file__).resolve().parent.parent
CORPUS_DIR = ROOT / "corpus" / "desk"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"
FIXTURES = Path(__file__).resolve().parent / "fixtures"

# the two-row example document (rectangle outline with a notch)
EXAMPLE_SVG = (
    '<svg width="100" height="100" viewBox="0 0 1024 1024" fill="black">'
    '<path d="M 288.453 128.219 h 608.872 L 736.109 384.556 l 160.034 256.891 '
    'H 288.453 v 320.745 h -96.128 V 64.337 h 96.000 v 64.000 z"/></svg>'
)


def corpus_files() -> list[Path]:
    return sorted(CORPUS_DIR.glob("*.svg"))


@pytest.fixture(scope="session")
def corpus():
    return [parse_svg(p.read_text()) for p in corpus_files()]


@pytest.fixture(scope="session")
def example_doc():
    return parse_svg(EXAMPLE_SVG)


def svg_doc(d: str, size: float = 64, extra: str = "") -> str:
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
            f'viewBox="0 0 {size} {size}"><path d="{d}"{extra}/></svg>')
