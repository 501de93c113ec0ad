"""SSIM, the composite perceptual reward, and group-relative advantages."""
from __future__ import annotations

import shlex
import subprocess
import tempfile
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, GroupTooSmall, MissingComponent, TooSmall
from .raster import RasterImage, write_pgm

COMPONENTS = ("dinov2_sim", "ssim", "lpips_prime")


@dataclass(frozen=True)
class SsimConfig:
    window: int = 11
    gaussian_sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError("window must be odd and >= 3")


def gaussian_kernel(cfg: SsimConfig) -> np.ndarray:
    r = cfg.window // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-0.5 * (x / cfg.gaussian_sigma) ** 2)
    return g / g.sum()


def _pixels(img) -> np.ndarray:
    if isinstance(img, RasterImage):
        return img.pixels
    return np.asarray(img, dtype=np.float64)


def ssim_map(a, b, cfg: SsimConfig = SsimConfig()) -> np.ndarray:
    x, y = _pixels(a), _pixels(b)
    if x.shape != y.shape:
        raise DimensionMismatch(f"image shapes differ: {x.shape} vs {y.shape}")
    if min(x.shape) < cfg.window:
        raise TooSmall(f"images must be at least {cfg.window}x{cfg.window}")
    k = gaussian_kernel(cfg)
    f = _kernels.filter_valid
    mu_x, mu_y = f(x, k), f(y, k)
    sxx = f(x * x, k) - mu_x * mu_x
    syy = f(y * y, k) - mu_y * mu_y
    sxy = f(x * y, k) - mu_x * mu_y
    c1 = (cfg.k1 * cfg.dynamic_range) ** 2
    c2 = (cfg.k2 * cfg.dynamic_range) ** 2
    num = (2 * mu_x * mu_y + c1) * (2 * sxy + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (sxx + syy + c2)
    return num / den


def ssim(a, b, cfg: SsimConfig = SsimConfig()) -> float:
    """Mean Gaussian-windowed SSIM over the fully covered ('valid') region."""
    return float(ssim_map(a, b, cfg).mean())


# --------------------------------------------------------------------------
# reward


@dataclass(frozen=True)
class RewardWeights:
    alpha: float = 0.4  # DINOv2 similarity
    beta: float = 0.3  # SSIM
    gamma: float = 0.3  # LPIPS'

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("reward weights must be non-negative")

    def as_dict(self) -> dict:
        return {"dinov2_sim": self.alpha, "ssim": self.beta, "lpips_prime": self.gamma}


SSIM_ONLY = RewardWeights(0.0, 1.0, 0.0)


def clamp01(x: float) -> float:
    return min(1.0, max(0.0, float(x)))


def composite_reward(scores: Mapping[str, float], w: RewardWeights = RewardWeights()) -> float:
    """Weighted sum of clamped component scores.

    A component may be absent only when its weight is zero.
    """
    total = 0.0
    for name, weight in w.as_dict().items():
        if name not in scores:
            if weight > 0:
                raise MissingComponent(f"reward needs {name!r} (weight {weight})")
            continue
        total += weight * clamp01(scores[name])
    return total


def grpo_advantages(rewards: Sequence[float]) -> list[float]:
    r = np.asarray(rewards, dtype=np.float64)
    if r.ndim != 1 or len(r) < 2:
        raise GroupTooSmall("advantages need a group of at least 2 samples")
    return list(r - r.mean())


# --------------------------------------------------------------------------
# metric providers


class MetricProvider:
    """Scores an (image, image) pair into [0, 1].

    ``thread_safe = False`` providers are called under a lock.
    """

    name: str = ""
    thread_safe: bool = True

    def __init__(self):
        self._lock = threading.Lock()

    def score(self, gt: RasterImage, pred: RasterImage) -> float:
        raise NotImplementedError

    def __call__(self, gt, pred) -> float:
        if self.thread_safe:
            return clamp01(self.score(gt, pred))
        with self._lock:
            return clamp01(self.score(gt, pred))


class SsimProvider(MetricProvider):
    name = "ssim"

    def __init__(self, cfg: SsimConfig = SsimConfig()):
        super().__init__()
        self.cfg = cfg

    def score(self, gt, pred):
        return ssim(gt, pred, self.cfg)


class FunctionProvider(MetricProvider):
    def __init__(self, name: str, func: Callable, thread_safe: bool = True):
        super().__init__()
        self.name = name
        self.func = func
        self.thread_safe = thread_safe

    def score(self, gt, pred):
        return float(self.func(gt, pred))


class CommandProvider(MetricProvider):
    """External scorer: ``template`` gets ``{gt}`` and ``{pred}`` PGM paths and
    must print one decimal in [0, 1] on stdout."""

    def __init__(self, name: str, template: str, thread_safe: bool = False, timeout: float = 120.0):
        super().__init__()
        if name not in COMPONENTS:
            raise ValueError(f"unknown provider name {name!r}; expected one of {COMPONENTS}")
        self.name = name
        self.template = template
        self.thread_safe = thread_safe
        self.timeout = timeout

    def score(self, gt, pred):
        with tempfile.TemporaryDirectory() as tmp:
            gt_path, pred_path = Path(tmp, "gt.pgm"), Path(tmp, "pred.pgm")
            write_pgm(gt, gt_path)
            write_pgm(pred, pred_path)
            argv = [a.format(gt=gt_path, pred=pred_path) for a in shlex.split(self.template)]
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=self.timeout)
        if proc.returncode != 0:
            raise RuntimeError(f"provider {self.name} failed: {proc.stderr.strip()}")
        out = proc.stdout.strip().split()
        if len(out) != 1:
            raise RuntimeError(f"provider {self.name} printed {proc.stdout!r}, expected one number")
        return float(out[0])


def score_pair(gt, pred, providers: Mapping[str, MetricProvider]) -> dict:
    return {name: p(gt, pred) for name, p in providers.items()}
