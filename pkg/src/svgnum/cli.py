"""Batch command-line front end.

Every subcommand writes JSON-lines records (one object per line, each with a
``command`` field) to ``--report`` or stdout and a short human summary to
stderr.  Exit codes: 0 success, 1 data failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np

from . import __version__, _kernels
from .errors import MissingComponent, SvgNumError
from .svg_core import parse_svg, serialize_svg

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2
SEED_ENV = "SVGF_SEED"


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# configuration


@dataclass
class PipelineConfig:
    M: float = 512.0
    precision: int = 3
    float_kind: str = "F16"
    ssim_threshold: float = 0.99
    fourier_k: int = 16
    d: int = 64
    lam: float = 1e-5
    noise_sigma: float = 0.2
    weight_dinov2: float = 0.4
    weight_ssim: float = 0.3
    weight_lpips: float = 0.3
    seed: int = 0
    render_size: int = 256
    workers: int = 0  # 0 = logical cores
    providers: dict = field(default_factory=dict)
    explicit: frozenset = frozenset()  # fields set by a flag, env or config file

    def validate(self) -> "PipelineConfig":
        from .svgfloat import FloatKind

        if self.float_kind not in FloatKind.__members__:
            raise UsageError(f"float_kind must be one of {list(FloatKind.__members__)}")
        if not self.M > 0:
            raise UsageError("M must be > 0")
        if self.precision < 0 or self.render_size < 11 or self.workers < 0:
            raise UsageError("precision, render_size and workers out of range")
        if min(self.weight_dinov2, self.weight_ssim, self.weight_lpips) < 0:
            raise UsageError("reward weights must be non-negative")
        return self

    @property
    def pool_size(self) -> int:
        return self.workers or os.cpu_count() or 1


# file keys -> field names; the file uses the documented spelling
_KEY_ALIASES = {"lambda": "lam"}
_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig) if f.name not in ("providers", "explicit")}


def _coerce(name: str, text: str):
    kind = type(getattr(PipelineConfig(), name))
    try:
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
    except ValueError:
        raise UsageError(f"config value for {name!r} is not a {kind.__name__}: {text!r}") from None
    return text


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; lines starting with ``#`` are comments."""
    values, providers = {}, {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        if key.startswith("provider."):
            providers[key[len("provider."):]] = value
            continue
        name = _KEY_ALIASES.get(key, key)
        if name not in _FIELDS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[name] = _coerce(name, value)
    if providers:
        values["providers"] = providers
    return values


def resolve_config(args: argparse.Namespace, environ=os.environ) -> PipelineConfig:
    """flags > SVGF_SEED (seed only) > config file > defaults."""
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    if SEED_ENV in environ and environ[SEED_ENV].strip():
        try:
            values["seed"] = int(environ[SEED_ENV])
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer") from None
    for name in _FIELDS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    weights = getattr(args, "weights", None)
    if weights is not None:
        values.update(zip(("weight_dinov2", "weight_ssim", "weight_lpips"), weights))
    for entry in getattr(args, "provider", None) or []:
        name, sep, template = entry.partition("=")
        if not sep:
            raise UsageError("--provider expects NAME=COMMAND")
        values.setdefault("providers", {})
        values["providers"] = {**values["providers"], name: template}
    values["explicit"] = frozenset(k for k in values if k in _FIELDS)
    return PipelineConfig(**values).validate()


# --------------------------------------------------------------------------
# plumbing


class Reporter:
    """Serialized JSON-lines sink."""

    def __init__(self, path: Optional[str]):
        self._fh = open(path, "w") if path else sys.stdout
        self._own = bool(path)

    def emit(self, record: dict) -> None:
        self._fh.write(json.dumps(record, sort_keys=True) + "\n")
        self._fh.flush()

    def close(self) -> None:
        if self._own:
            self._fh.close()


def note(msg: str) -> None:
    print(msg, file=sys.stderr)


def collect_inputs(paths: Iterable[str], suffixes: tuple, dir_suffixes: Optional[tuple] = None) -> list[Path]:
    """Expand directories (non-recursive) and check extensions."""
    files = []
    for p in map(Path, paths):
        if p.is_dir():
            wanted = dir_suffixes or suffixes
            files.extend(sorted(q for q in p.iterdir() if q.suffix.lower() in wanted))
        elif not p.exists():
            raise UsageError(f"no such file: {p}")
        elif p.suffix.lower() in suffixes:
            files.append(p)
        else:
            raise UsageError(f"unsupported extension {p.suffix!r} for {p} (expected {', '.join(suffixes)})")
    return files


def fan_out(func: Callable, items: list, workers: int) -> list:
    """Order-preserving map over a bounded thread pool."""
    if workers <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def _error(exc: Exception) -> dict:
    return {"error": type(exc).__name__, "message": str(exc)}


def _load_svg(path: Path):
    return parse_svg(path.read_text(encoding="utf-8"))


# --------------------------------------------------------------------------
# subcommands


def cmd_convert(args, cfg: PipelineConfig, out: Reporter) -> int:
    from .svgfloat import FloatKind, decode, encode

    files = collect_inputs(args.inputs, (".svg", ".svgf"), dir_suffixes=(".svg",))
    directions = {f.suffix.lower() for f in files}
    if len(directions) > 1:
        raise UsageError("mixed .svg and .svgf inputs; convert one direction at a time")
    kind = FloatKind[cfg.float_kind]
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)

    def work(path: Path) -> dict:
        rec = {"command": "convert", "file": str(path)}
        try:
            if path.suffix.lower() == ".svg":
                doc = _load_svg(path)
                text = serialize_svg(doc, cfg.precision).encode("ascii")
                blob = encode(doc, kind)
                target = (out_dir or path.parent) / (path.stem + ".svgf")
                target.write_bytes(blob)
                rec.update(ok=True, direction="svg->svgf", kind=kind.name, output=str(target),
                           raw_bytes=len(text), svgf_bytes=len(blob), ratio=len(text) / len(blob))
            else:
                blob = path.read_bytes()
                text = serialize_svg(decode(blob), cfg.precision)
                target = (out_dir or path.parent) / (path.stem + ".svg")
                target.write_text(text)
                rec.update(ok=True, direction="svgf->svg", output=str(target),
                           raw_bytes=len(text), svgf_bytes=len(blob), ratio=len(text) / len(blob))
        except (SvgNumError, OSError, UnicodeDecodeError) as exc:
            rec.update(ok=False, **_error(exc))
        return rec

    failures = 0
    for rec in fan_out(work, files, cfg.pool_size):
        out.emit(rec)
        if rec["ok"]:
            note(f"{rec['file']} -> {rec['output']} ({rec['ratio']:.3f}x)")
        else:
            failures += 1
            note(f"{rec['file']}: {rec['error']}: {rec['message']}")
            if not args.continue_on_error:
                break
    return EXIT_DATA if failures else EXIT_OK


def cmd_normalize(args, cfg: PipelineConfig, out: Reporter) -> int:
    from .preprocess import CanvasConfig, FilterVerdict, Reason, filter_check, normalize_to_canvas

    files = collect_inputs(args.inputs, (".svg",))
    canvas = CanvasConfig(cfg.M, cfg.ssim_threshold, cfg.precision, cfg.render_size)
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)

    def work(path: Path) -> dict:
        rec = {"command": "normalize", "file": str(path)}
        try:
            doc = _load_svg(path)
            normalized, scale = normalize_to_canvas(doc, canvas)
            verdict = filter_check(doc, normalized, canvas)
            rec.update(verdict.to_dict(), scale=scale)
            if verdict.accepted and out_dir:
                target = out_dir / path.name
                target.write_text(serialize_svg(normalized, cfg.precision))
                rec["output"] = str(target)
        except (SvgNumError, OSError, UnicodeDecodeError) as exc:
            rec.update(FilterVerdict(False, Reason.PARSE_FAILURE).to_dict(), **_error(exc))
        return rec

    records = fan_out(work, files, cfg.pool_size)
    counts: dict = {}
    for rec in records:
        out.emit(rec)
        counts[rec["reason"]] = counts.get(rec["reason"], 0) + 1
    accepted = [r for r in records if r["accepted"]]
    scores = [r["ssim"] for r in accepted if r["ssim"] is not None]
    summary = {
        "command": "normalize", "summary": True, "files": len(records), "accepted": len(accepted),
        "accepted_fraction": len(accepted) / len(records) if records else None,
        "mean_ssim": float(np.mean(scores)) if scores else None, "reasons": counts,
    }
    out.emit(summary)
    note(f"accepted {len(accepted)}/{len(records)}; mean SSIM {summary['mean_ssim']}; {counts}")
    if not args.continue_on_error and len(accepted) != len(records):
        return EXIT_DATA
    return EXIT_OK


def cmd_decompose(args, cfg: PipelineConfig, out: Reporter) -> int:
    from .dual_sequence import decompose, decompose_path
    from .svg_core import parse_path

    failures = 0
    items = [("path", p) for p in args.path or []]
    items += [("file", f) for f in collect_inputs(args.inputs, (".svg",))]
    if not items:
        raise UsageError("nothing to decompose: give .svg inputs or --path")
    for kind, item in items:
        rec = {"command": "decompose", "source": str(item)}
        try:
            seq = decompose_path(parse_path(item), cfg.M) if kind == "path" else decompose(_load_svg(item), cfg.M)
            rec.update(seq.to_dict(), ok=True)
        except (SvgNumError, OSError, UnicodeDecodeError) as exc:
            failures += 1
            rec.update(ok=False, **_error(exc))
        out.emit(rec)
    note(f"decomposed {len(items) - failures}/{len(items)}")
    return EXIT_DATA if failures else EXIT_OK


def cmd_consolidate(args, cfg: PipelineConfig, out: Reporter) -> int:
    from .dual_sequence import DualSequence, consolidate

    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    try:
        lines = Path(args.input).read_text().splitlines() if args.input != "-" else sys.stdin.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc}") from None
    failures = total = 0
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        total += 1
        rec = {"command": "consolidate", "line": lineno}
        try:
            data = json.loads(line)
            rec["source"] = data.get("source") if isinstance(data, dict) else None
            text = consolidate(DualSequence.from_dict(data), cfg.precision)
            rec.update(ok=True, text=text)
            if out_dir and rec["source"]:
                target = out_dir / (Path(rec["source"]).stem + ".svg")
                target.write_text(text)
                rec["output"] = str(target)
        except (SvgNumError, json.JSONDecodeError, ValueError, TypeError) as exc:
            failures += 1
            rec.update(ok=False, **_error(exc))
        out.emit(rec)
    note(f"consolidated {total - failures}/{total}")
    return EXIT_DATA if failures else EXIT_OK


def cmd_stats(args, cfg: PipelineConfig, out: Reporter) -> int:
    from .dual_sequence import TokenizerStrategy, token_stats

    docs = [_load_svg(f) for f in collect_inputs(args.inputs, (".svg",))]
    docs += list(args.path or [])
    if not docs:
        raise UsageError("empty corpus")
    strategies = [TokenizerStrategy(s) for s in (args.strategies or [s.value for s in TokenizerStrategy])]
    totals = {s.value: sum(token_stats(d, s, cfg.precision) for d in docs) for s in strategies}
    ratios = {f"{a}/{b}": totals[a] / totals[b] for a in totals for b in totals
              if a != b and totals[b]}
    out.emit({"command": "stats", "files": len(docs), "totals": totals, "ratios": ratios})
    width = max(len(k) for k in totals)
    note(f"{'strategy':<{width}}  tokens")
    for k, v in totals.items():
        note(f"{k:<{width}}  {v}")
    for k, v in ratios.items():
        note(f"{k}: {v:.3f}x")
    return EXIT_OK


def _verify_checks(cfg: PipelineConfig, checkpoint: Optional[str]):
    from . import number_codec as nc
    from .dual_sequence import TokenizerStrategy, token_stats
    from .metrics import ssim
    from .raster import rasterize
    from .svgfloat import FloatKind, decode, encode, nan_box, nan_unbox
    from .svg_core import OPCODES

    sample = parse_svg(
        '<svg xmlns="http://www.w3.org/2000/svg" width="64" height="64" viewBox="0 0 64 64">'
        '<path d="M 4.5 4 L 60 8.25 Q 40 60 4 58 Z" fill-rule="evenodd"/></svg>'
    )

    def table_counts():
        got = [token_stats("M 123.456 234.567", s) for s in TokenizerStrategy]
        return got == [16, 8, 3], f"counts {got}"

    def nan_boxes():
        bad = [(op, k.name) for k in FloatKind for op in sorted(OPCODES) if nan_unbox(nan_box(op, k), k) != op]
        return not bad, f"{len(OPCODES) * len(FloatKind) - len(bad)} cases round-trip"

    def codec_roundtrip():
        for k in FloatKind:
            if decode(encode(sample, k)) != sample:
                return False, f"{k.name} round trip changed the document"
        return True, "F32/F16/BF16"

    def ssim_identity():
        img = rasterize(sample, 64, 64)
        v = ssim(img, img)
        return abs(v - 1.0) < 1e-9, f"ssim(x, x) = {v!r}"

    def grad_check():
        rng = np.random.default_rng(cfg.seed)
        if checkpoint:
            params = nc.load_checkpoint(checkpoint)
            err = nc.grad_check(params, rng.uniform(-1, 1, 4))
        else:
            params = nc.init_codec(k=4, d=8, seed=cfg.seed)
            err = nc.grad_check(params, rng.uniform(-1, 1, 6))
        return err <= 1e-5, f"max relative error {err:.3e}"

    return [("table_counts", table_counts), ("nan_box", nan_boxes), ("svgfloat_roundtrip", codec_roundtrip),
            ("ssim_identity", ssim_identity), ("grad_check", grad_check)]


def cmd_verify(args, cfg: PipelineConfig, out: Reporter) -> int:
    first_failure = None
    for name, check in _verify_checks(cfg, args.checkpoint):
        t0 = time.perf_counter()
        try:
            ok, detail = check()
        except (SvgNumError, OSError, ValueError, KeyError) as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        rec = {"command": "verify", "check": name, "ok": bool(ok), "detail": detail,
               "seconds": time.perf_counter() - t0}
        if args.json:
            out.emit(rec)
        note(f"{'PASS' if ok else 'FAIL'} {name} ({rec['seconds']:.2f}s) {detail}")
        if not ok and first_failure is None:
            first_failure = name
    if first_failure:
        note(f"verify failed at {first_failure}")
        return EXIT_DATA
    return EXIT_OK


def _load_image(path: Path, size: int):
    from .raster import rasterize, read_pgm

    if path.suffix.lower() == ".pgm":
        return read_pgm(path)
    return rasterize(_load_svg(path), size, size)


def cmd_reward(args, cfg: PipelineConfig, out: Reporter) -> int:
    from .metrics import (
        COMPONENTS, SSIM_ONLY, CommandProvider, RewardWeights, SsimProvider,
        composite_reward, grpo_advantages, score_pair,
    )

    (gt_path,) = collect_inputs([args.gt], (".svg", ".pgm"))
    candidates = collect_inputs(args.candidates, (".svg", ".pgm"))
    providers = {"ssim": SsimProvider()}
    for name, template in cfg.providers.items():
        if name not in COMPONENTS:
            raise UsageError(f"unknown provider {name!r}; expected one of {COMPONENTS}")
        providers[name] = CommandProvider(name, template)
    weights = RewardWeights(cfg.weight_dinov2, cfg.weight_ssim, cfg.weight_lpips)
    weights_given = bool(cfg.explicit & {"weight_dinov2", "weight_ssim", "weight_lpips"})
    if not weights_given and set(providers) == {"ssim"}:
        weights = SSIM_ONLY
    needed = {n for n, w in weights.as_dict().items() if w > 0}
    missing = needed - set(providers)
    if missing:
        raise MissingComponent(f"weights need providers {sorted(missing)}; configure provider.NAME")
    try:
        gt = _load_image(gt_path, cfg.render_size)
        preds = [_load_image(c, cfg.render_size) for c in candidates]
    except (SvgNumError, OSError, UnicodeDecodeError) as exc:
        note(f"cannot load image: {type(exc).__name__}: {exc}")
        return EXIT_DATA
    active = {n: p for n, p in providers.items() if weights.as_dict()[n] > 0 or n == "ssim"}
    scores = fan_out(lambda img: score_pair(gt, img, active), preds, cfg.pool_size)
    rewards = [composite_reward(s, weights) for s in scores]
    advantages = grpo_advantages(rewards) if len(rewards) >= 2 else [None] * len(rewards)
    for path, s, r, a in zip(candidates, scores, rewards, advantages):
        out.emit({"command": "reward", "candidate": str(path), "scores": s, "reward": r,
                  "advantage": a, "weights": weights.as_dict()})
    if len(rewards) < 2:
        note("fewer than 2 candidates: advantages omitted")
    note(f"{len(rewards)} candidates; mean reward {np.mean(rewards) if rewards else float('nan'):.6f}")
    return EXIT_OK


def cmd_bench(args, cfg: PipelineConfig, out: Reporter) -> int:
    from .raster import rasterize
    from .svgfloat import FloatKind, decode, encode

    files = collect_inputs(args.inputs, (".svg",))
    kind = FloatKind[cfg.float_kind]
    docs = [(f, _load_svg(f)) for f in files]
    if docs:
        rasterize(docs[0][1], 16, 16)  # JIT warm-up outside the timings
    totals = {"encode": 0.0, "decode": 0.0, "rasterize": 0.0}
    for path, doc in docs:
        t0 = time.perf_counter()
        for _ in range(args.repeat):
            blob = encode(doc, kind)
        t1 = time.perf_counter()
        for _ in range(args.repeat):
            decode(blob)
        t2 = time.perf_counter()
        for _ in range(args.repeat):
            rasterize(doc, cfg.render_size, cfg.render_size)
        t3 = time.perf_counter()
        rec = {"command": "bench", "file": str(path), "backend": _kernels.BACKEND, "kind": kind.name,
               "encode_s": (t1 - t0) / args.repeat, "decode_s": (t2 - t1) / args.repeat,
               "rasterize_s": (t3 - t2) / args.repeat}
        for key in totals:
            totals[key] += rec[f"{key}_s"]
        out.emit(rec)
    out.emit({"command": "bench", "summary": True, "files": len(docs), "backend": _kernels.BACKEND,
              **{f"{k}_total_s": v for k, v in totals.items()}})
    note(f"{len(docs)} files on {_kernels.BACKEND}: " + ", ".join(f"{k} {v:.3f}s" for k, v in totals.items()))
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--report", help="write JSON-lines records here instead of stdout")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="worker pool size (default: logical cores)")
    p.add_argument("--M", dest="M", type=float, help="canvas bound")
    p.add_argument("--precision", type=int)
    p.add_argument("--render-size", dest="render_size", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="svgnum", description="Continuous-number SVG pipeline tools.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="SVG <-> SVGFloat")
    _common(p)
    p.add_argument("inputs", nargs="+")
    p.add_argument("--kind", dest="float_kind", choices=["F32", "F16", "BF16"])
    p.add_argument("--out", help="output directory (default: next to each input)")
    p.add_argument("--continue-on-error", action="store_true")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("normalize", help="fit documents to the canvas and filter them")
    _common(p)
    p.add_argument("inputs", nargs="*")
    p.add_argument("--out", help="directory for accepted, normalized documents")
    p.add_argument("--ssim-threshold", dest="ssim_threshold", type=float)
    p.add_argument("--strict", dest="continue_on_error", action="store_false",
                   help="exit 1 if any file is rejected")
    p.set_defaults(func=cmd_normalize, continue_on_error=True)

    p = sub.add_parser("decompose", help="documents -> dual sequences (JSON lines)")
    _common(p)
    p.add_argument("inputs", nargs="*")
    p.add_argument("--path", action="append", help="bare path data to decompose")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("consolidate", help="dual sequences (JSON lines) -> SVG text")
    _common(p)
    p.add_argument("input", help="JSON-lines file or - for stdin")
    p.add_argument("--out", help="directory for reconstructed documents")
    p.set_defaults(func=cmd_consolidate)

    p = sub.add_parser("stats", help="token counts per tokenizer strategy")
    _common(p)
    p.add_argument("inputs", nargs="*")
    p.add_argument("--path", action="append", help="bare path data to include")
    p.add_argument("--strategy", dest="strategies", action="append",
                   choices=["DigitLevel", "NumberAware", "Placeholder"])
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("verify", help="run the built-in self checks")
    _common(p)
    p.add_argument("--json", action="store_true", help="emit one JSON record per check")
    p.add_argument("--checkpoint", help="grad-check this number codec checkpoint")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reward", help="composite rewards and group advantages")
    _common(p)
    p.add_argument("gt", help="ground truth .svg or .pgm")
    p.add_argument("candidates", nargs="+")
    p.add_argument("--weights", type=float, nargs=3, metavar=("DINOV2", "SSIM", "LPIPS"))
    p.add_argument("--provider", action="append", help="NAME=COMMAND with {gt} and {pred} placeholders")
    p.set_defaults(func=cmd_reward)

    p = sub.add_parser("bench", help="per-file encode/decode/rasterize timings")
    _common(p)
    p.add_argument("inputs", nargs="+")
    p.add_argument("--kind", dest="float_kind", choices=["F32", "F16", "BF16"])
    p.add_argument("--repeat", type=int, default=3)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    out = None
    try:
        cfg = resolve_config(args)
        out = Reporter(args.report)
        return args.func(args, cfg, out)
    except UsageError as exc:
        note(f"usage error: {exc}")
        return EXIT_USAGE
    except MissingComponent as exc:
        note(f"usage error: {exc}")
        return EXIT_USAGE
    except (SvgNumError, OSError) as exc:
        note(f"error: {type(exc).__name__}: {exc}")
        return EXIT_DATA
    finally:
        if out is not None:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
