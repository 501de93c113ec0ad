"""Token/float decomposition of documents and the consolidator that inverts it.

A document becomes two parallel streams: symbolic tokens in which every
numeric literal is replaced by ``[NUM]``, and the replaced values divided by
the canvas bound ``M``.  Consolidation walks the tokens, pulls one float per
placeholder, de-normalizes, clips to ``[-M, M]``, rounds, and splices.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

from .errors import CountMismatch, MalformedDocument
from .svg_core import (
    NUM,
    OP,
    OPCODES,
    SYM,
    PathCommand,
    SvgDocument,
    document_segments,
    format_number,
    join_segments,
    parse_path,
    path_segments,
)

NUM_TOKEN = "[NUM]"
_PATH_OPEN = ' d="'
_STROKE_WIDTH_OPEN = ' stroke-width="'


@dataclass
class DualSequence:
    tokens: list
    floats: list
    M: float
    raw_values: Optional[list] = None

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("M must be > 0")
        self.tokens = list(self.tokens)
        self.floats = [float(v) for v in self.floats]

    @property
    def placeholder_count(self) -> int:
        return sum(1 for t in self.tokens if t == NUM_TOKEN)

    @property
    def is_consistent(self) -> bool:
        return self.placeholder_count == len(self.floats)

    def to_dict(self) -> dict:
        out = {"tokens": self.tokens, "floats": self.floats, "M": self.M}
        if self.raw_values is not None:
            out["raw_values"] = self.raw_values
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "DualSequence":
        try:
            tokens, floats, M = data["tokens"], data["floats"], data["M"]
        except (KeyError, TypeError) as exc:
            raise MalformedDocument(f"dual sequence record missing field: {exc}") from None
        if not all(isinstance(t, str) for t in tokens):
            raise MalformedDocument("tokens must be strings")
        return cls(tokens, floats, float(M), data.get("raw_values"))

    @classmethod
    def from_json(cls, line: str) -> "DualSequence":
        return cls.from_dict(json.loads(line))


def _to_sequence(segments, M: float) -> DualSequence:
    tokens, raw = [], []
    for kind, value in segments:
        if kind == NUM:
            tokens.append(NUM_TOKEN)
            raw.append(value)
        else:
            tokens.append(value)
    return DualSequence(tokens, [v / M for v in raw], M, raw)


def decompose(doc: SvgDocument, M: float) -> DualSequence:
    return _to_sequence(document_segments(doc), M)


def decompose_path(commands: Sequence[PathCommand], M: float) -> DualSequence:
    return _to_sequence(path_segments(commands), M)


def consolidate(seq: DualSequence, precision: int = 3) -> str:
    """Merge tokens and predicted floats back into SVG (or bare path-data) text.

    Arc flags are snapped to 0/1 and arc radii / stroke widths floored at 0 so
    that any in-range prediction yields text the parser accepts.
    """
    M = seq.M
    floats = seq.floats
    segs = []
    fi = 0
    in_path = bool(seq.tokens) and seq.tokens[0] in OPCODES
    opcode = None
    pidx = 0
    last_sym = ""
    for tok in seq.tokens:
        if tok == NUM_TOKEN:
            if fi >= len(floats):
                raise CountMismatch(
                    f"{seq.placeholder_count} placeholders but only {len(floats)} floats"
                )
            v = floats[fi]
            if math.isnan(v):
                raise MalformedDocument(f"float #{fi} is NaN")
            fi += 1
            n = min(M, max(-M, M * v))
            if in_path and opcode is not None and opcode in "Aa":
                slot = pidx % 7
                if slot in (3, 4):
                    n = 1.0 if n >= 0.5 else 0.0
                elif slot in (0, 1):
                    n = max(n, 0.0)
            elif not in_path and last_sym == _STROKE_WIDTH_OPEN:
                n = max(n, 0.0)
            pidx += 1
            segs.append((NUM, n))
        elif in_path and tok in OPCODES:
            opcode, pidx = tok, 0
            segs.append((OP, tok))
        else:
            if tok == _PATH_OPEN:
                in_path, opcode = True, None
            elif in_path:
                in_path = False
            last_sym = tok
            segs.append((SYM, tok))
    if fi != len(floats):
        raise CountMismatch(f"{len(floats) - fi} floats left over after the last placeholder")
    return join_segments(segs, lambda v: format_number(v, precision))


# --------------------------------------------------------------------------
# tokenizer statistics


class TokenizerStrategy(str, enum.Enum):
    DIGIT_LEVEL = "DigitLevel"
    NUMBER_AWARE = "NumberAware"
    PLACEHOLDER = "Placeholder"


def _number_tokens(literal: str, strategy: TokenizerStrategy) -> int:
    if strategy is TokenizerStrategy.PLACEHOLDER:
        return 1
    if strategy is TokenizerStrategy.DIGIT_LEVEL:
        return len(literal)
    sign = literal[0] in "+-"
    body = literal[1:] if sign else literal
    whole, dot, frac = body.partition(".")
    return sum(1 for part in (sign, whole, dot, frac) if part)


def _path_token_count(commands, strategy: TokenizerStrategy, precision: int) -> int:
    # A separator adjacent to an opcode is absorbed into it; a separator
    # between two numbers is its own token except under Placeholder.
    count = 0
    prev_num = False
    for kind, value in path_segments(commands):
        if kind == OP:
            count += 1
            prev_num = False
            continue
        if prev_num and strategy is not TokenizerStrategy.PLACEHOLDER:
            count += 1
        count += _number_tokens(format_number(value, precision), strategy)
        prev_num = True
    return count


PathLike = Union[SvgDocument, str, Sequence[PathCommand]]


def _command_lists(item: PathLike) -> Iterable:
    if isinstance(item, SvgDocument):
        return [p.commands for p in item.paths]
    if isinstance(item, str):
        return [parse_path(item)]
    return [list(item)]


def token_stats(item: PathLike, strategy: TokenizerStrategy, precision: int = 3) -> int:
    """Token count of the canonical path data of ``item`` under ``strategy``."""
    strategy = TokenizerStrategy(strategy)
    return sum(_path_token_count(c, strategy, precision) for c in _command_lists(item))


def corpus_token_totals(corpus: Sequence[PathLike], precision: int = 3) -> dict:
    return {
        s.value: sum(token_stats(doc, s, precision) for doc in corpus) for s in TokenizerStrategy
    }


def compression_ratio(
    corpus: Sequence[PathLike], a: TokenizerStrategy, b: TokenizerStrategy, precision: int = 3
) -> float:
    if not corpus:
        raise ValueError("corpus must be non-empty")
    ta = sum(token_stats(d, a, precision) for d in corpus)
    tb = sum(token_stats(d, b, precision) for d in corpus)
    return ta / tb
