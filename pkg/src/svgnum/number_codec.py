"""Number encoder / decoder at desk scale.

``encoder``: normalize -> (optional Gaussian noise) -> Fourier features ->
GELU MLP with two hidden layers -> R^d.  ``decoder``: GELU MLP with two
hidden layers, R^d -> normalized scalar.  Everything is float64 numpy with
hand-written backward passes, so gradients can be checked against central
differences.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, Divergence, EmptyIndexSet, IndexOutOfRange

_GELU_C = math.sqrt(2.0 / math.pi)
_GELU_A = 0.044715


def normalize(n, M: float):
    return n / M


def denormalize(v, M: float):
    return M * v


def add_noise(v, sigma: float, rng: np.random.Generator):
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    v = np.asarray(v, dtype=np.float64)
    out = v + rng.normal(0.0, sigma, size=v.shape) if sigma > 0 else v.copy()
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# Fourier features


@dataclass(frozen=True)
class FourierConfig:
    k: int = 16

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


def fourier_features(v, cfg: Union[FourierConfig, int] = FourierConfig()) -> np.ndarray:
    """[sin(2^0 pi v), cos(2^0 pi v), ..., sin(2^(k-1) pi v), cos(2^(k-1) pi v)] along the last axis."""
    k = cfg.k if isinstance(cfg, FourierConfig) else int(cfg)
    v = np.asarray(v, dtype=np.float64)
    arg = v[..., None] * (np.pi * 2.0 ** np.arange(k))
    out = np.empty(v.shape + (2 * k,))
    out[..., 0::2] = np.sin(arg)
    out[..., 1::2] = np.cos(arg)
    return out


def _fourier_grad(v, k):
    """d gamma / d v, same layout as fourier_features."""
    freq = np.pi * 2.0 ** np.arange(k)
    arg = v[..., None] * freq
    out = np.empty(v.shape + (2 * k,))
    out[..., 0::2] = np.cos(arg) * freq
    out[..., 1::2] = -np.sin(arg) * freq
    return out


# --------------------------------------------------------------------------
# MLP


def gelu(x):
    """tanh approximation."""
    return 0.5 * x * (1.0 + np.tanh(_GELU_C * (x + _GELU_A * x ** 3)))


def gelu_grad(x):
    t = np.tanh(_GELU_C * (x + _GELU_A * x ** 3))
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * _GELU_C * (1.0 + 3.0 * _GELU_A * x * x)


@dataclass
class MlpParams:
    """Dense layers ``y = W x + b``; GELU after every layer but the last."""

    weights: list
    biases: list

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ValueError("need one bias per weight matrix")
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.ndim != 2 or b.shape != (W.shape[0],):
                raise ValueError(f"layer {i}: weight {W.shape} / bias {b.shape} mismatch")
            if i and W.shape[1] != self.weights[i - 1].shape[0]:
                raise ValueError(f"layer {i} input {W.shape[1]} != previous output")

    @property
    def layer_dims(self) -> list:
        return [self.weights[0].shape[1]] + [W.shape[0] for W in self.weights]

    @property
    def hidden_layers(self) -> int:
        return len(self.weights) - 1

    @classmethod
    def init(cls, layer_dims: Sequence[int], rng: np.random.Generator) -> "MlpParams":
        Ws, bs = [], []
        for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
            bound = 1.0 / math.sqrt(fan_in)
            Ws.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            bs.append(rng.uniform(-bound, bound, size=fan_out))
        return cls(Ws, bs)

    def copy(self) -> "MlpParams":
        return MlpParams([W.copy() for W in self.weights], [b.copy() for b in self.biases])

    def arrays(self) -> list:
        out = []
        for W, b in zip(self.weights, self.biases):
            out += [W, b]
        return out


def mlp_forward(params: MlpParams, x: np.ndarray):
    """x: (n, d_in) -> (y, cache)."""
    cache = []
    h = x
    last = len(params.weights) - 1
    for i, (W, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ W.T + b
        cache.append((h, z))
        h = z if i == last else gelu(z)
    return h, cache


def mlp_backward(params: MlpParams, cache, grad_out: np.ndarray):
    """Returns (weight grads, bias grads, grad wrt input)."""
    gW = [None] * len(params.weights)
    gb = [None] * len(params.weights)
    g = grad_out
    last = len(params.weights) - 1
    for i in range(last, -1, -1):
        h, z = cache[i]
        if i != last:
            g = g * gelu_grad(z)
        gW[i] = g.T @ h
        gb[i] = g.sum(axis=0)
        g = g @ params.weights[i]
    return gW, gb, g


# --------------------------------------------------------------------------
# codec parameters


@dataclass
class NumberCodecParams:
    fourier: FourierConfig
    encoder: MlpParams
    decoder: MlpParams
    M: float = 512.0
    noise_sigma: float = 0.2  # normalized units

    def __post_init__(self):
        for name, mlp in (("encoder", self.encoder), ("decoder", self.decoder)):
            if mlp.hidden_layers != 2:
                raise ValueError(f"{name} must have exactly 2 hidden layers")
        if self.encoder.layer_dims[0] != 2 * self.fourier.k:
            raise ValueError("encoder input must be 2k wide")
        if self.encoder.layer_dims[-1] != self.decoder.layer_dims[0]:
            raise ValueError("encoder output and decoder input widths differ")
        if self.decoder.layer_dims[-1] != 1:
            raise ValueError("decoder must output a scalar")

    @property
    def d(self) -> int:
        return self.encoder.layer_dims[-1]

    @property
    def noise_eta(self) -> float:
        """Noise scale in absolute (user-unit) coordinates."""
        return self.noise_sigma * self.M

    def copy(self) -> "NumberCodecParams":
        return replace(self, encoder=self.encoder.copy(), decoder=self.decoder.copy())


def init_codec(k: int = 16, d: int = 64, M: float = 512.0, noise_sigma: float = 0.2,
               seed: int = 0) -> NumberCodecParams:
    rng = np.random.default_rng(seed)
    enc = MlpParams.init([2 * k, d, d, d], rng)
    dec = MlpParams.init([d, d, d, 1], rng)
    return NumberCodecParams(FourierConfig(k), enc, dec, M, noise_sigma)


def encoder_forward(v, params: NumberCodecParams, training: bool = False,
                    rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Normalized value(s) -> embedding(s) of width d.  Noise only in training mode."""
    v = np.asarray(v, dtype=np.float64)
    if training and params.noise_sigma > 0:
        if rng is None:
            raise ValueError("training mode needs an rng")
        v = np.asarray(add_noise(v, params.noise_sigma, rng))
    feats = fourier_features(v.reshape(-1), params.fourier)
    out, _ = mlp_forward(params.encoder, feats)
    return out.reshape(v.shape + (params.d,))


def encode_number(n, params: NumberCodecParams, training: bool = False, rng=None) -> np.ndarray:
    """Raw user-unit number(s) -> embedding(s)."""
    return encoder_forward(normalize(np.asarray(n, dtype=np.float64), params.M), params, training, rng)


def decoder_forward(h, params: NumberCodecParams):
    h = np.asarray(h, dtype=np.float64)
    if h.shape[-1:] != (params.d,):
        raise DimensionMismatch(f"hidden state has width {h.shape[-1:]}, expected {params.d}")
    out, _ = mlp_forward(params.decoder, h.reshape(-1, params.d))
    out = out[:, 0]
    return float(out[0]) if h.ndim == 1 else out.reshape(h.shape[:-1])


def decode_number(h, params: NumberCodecParams):
    return denormalize(decoder_forward(h, params), params.M)


# --------------------------------------------------------------------------
# losses


@dataclass(frozen=True)
class LossWeights:
    lam: float = 1e-5

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")


def mse_loss(predicted_n: Sequence[float], target_n: Sequence[float]) -> float:
    """Mean squared error over the placeholder positions, in absolute units."""
    p = np.asarray(predicted_n, dtype=np.float64)
    t = np.asarray(target_n, dtype=np.float64)
    if p.shape != t.shape:
        raise DimensionMismatch(f"{p.shape} predictions vs {t.shape} targets")
    if p.size == 0:
        raise EmptyIndexSet("no [NUM] positions to average over")
    return float(np.mean((p - t) ** 2))


def normalized_mse(predicted_v, target_v) -> float:
    """Convenience variant on normalized values; not the training objective's L_num."""
    return mse_loss(predicted_v, target_v)


def cross_entropy_loss(logits, targets: Sequence[int]) -> float:
    """Summed (not averaged) negative log-likelihood of the target tokens."""
    z = np.asarray(logits, dtype=np.float64)
    t = np.asarray(targets)
    if z.ndim != 2 or t.shape != (z.shape[0],):
        raise DimensionMismatch("logits must be (T, V) with one target per step")
    if t.size and (t.min() < 0 or t.max() >= z.shape[1]):
        raise IndexOutOfRange("target index outside the vocabulary")
    m = z.max(axis=1, keepdims=True)
    lse = (m + np.log(np.exp(z - m).sum(axis=1, keepdims=True)))[:, 0]
    return float(np.sum(lse - z[np.arange(len(t)), t]))


def joint_loss(ce: float, mse: float, w: Union[LossWeights, float] = LossWeights()) -> float:
    lam = w.lam if isinstance(w, LossWeights) else float(w)
    return ce + lam * mse


# --------------------------------------------------------------------------
# end-to-end loss and gradients


def autoencoder_loss_and_grads(params: NumberCodecParams, values, targets=None):
    """mean((decoder(encoder(v)) - target)^2) and its gradients (no noise)."""
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    t = v if targets is None else np.asarray(targets, dtype=np.float64).reshape(-1)
    feats = fourier_features(v, params.fourier)
    h, enc_cache = mlp_forward(params.encoder, feats)
    out, dec_cache = mlp_forward(params.decoder, h)
    err = out[:, 0] - t
    loss = float(np.mean(err ** 2))
    g = (2.0 / len(v)) * err[:, None]
    dW, db, gh = mlp_backward(params.decoder, dec_cache, g)
    eW, eb, _ = mlp_backward(params.encoder, enc_cache, gh)
    return loss, (eW, eb, dW, db)


def _mlp_only_loss_and_grads(mlp: MlpParams, x, targets):
    x = np.asarray(x, dtype=np.float64)
    out, cache = mlp_forward(mlp, x)
    err = out - np.asarray(targets, dtype=np.float64).reshape(out.shape)
    loss = float(np.mean(err ** 2))
    gW, gb, _ = mlp_backward(mlp, cache, 2.0 * err / err.size)
    return loss, (gW, gb)


def _param_arrays(obj) -> list:
    if isinstance(obj, NumberCodecParams):
        return obj.encoder.weights + obj.encoder.biases + obj.decoder.weights + obj.decoder.biases
    return obj.weights + obj.biases


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-5) -> np.ndarray:
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / denom


def grad_check(params, inputs, targets=None, epsilon: float = 1e-5, floor: float = 1e-5) -> float:
    """Max relative error between backprop and central differences over every parameter.

    ``params`` is a :class:`NumberCodecParams` (loss through decoder(encoder(v)))
    or a bare :class:`MlpParams` (loss through the MLP alone; ``inputs`` are its
    input rows).  Non-finite parameters or gradients give ``inf``.
    """
    if not 1e-7 <= epsilon <= 1e-4:
        raise ValueError("epsilon must lie in [1e-7, 1e-4]")
    if isinstance(params, NumberCodecParams):
        def loss_fn():
            return autoencoder_loss_and_grads(params, inputs, targets)[0]

        _, (eW, eb, dW, db) = autoencoder_loss_and_grads(params, inputs, targets)
        analytic = eW + eb + dW + db
    else:
        def loss_fn():
            return _mlp_only_loss_and_grads(params, inputs, targets)[0]

        _, (gW, gb) = _mlp_only_loss_and_grads(params, inputs, targets)
        analytic = gW + gb
    arrays = _param_arrays(params)
    worst = 0.0
    for arr, grad in zip(arrays, analytic):
        if not (np.isfinite(arr).all() and np.isfinite(grad).all()):
            return math.inf
        numeric = np.empty_like(arr)
        flat = arr.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + epsilon
            up = loss_fn()
            flat[i] = old - epsilon
            down = loss_fn()
            flat[i] = old
            numeric.flat[i] = (up - down) / (2.0 * epsilon)
        if not np.isfinite(numeric).all():
            return math.inf
        worst = max(worst, float(relative_error(grad, numeric, floor).max()))
    return worst


def train_autoencoder(values, params: Optional[NumberCodecParams] = None, steps: int = 5000,
                      learning_rate: float = 0.1, seed: int = 0, k: int = 16, d: int = 32,
                      target_loss: Optional[float] = None):
    """Plain full-batch gradient descent on mean (v_hat - v)^2.

    Stops early once the loss drops below ``target_loss``.  Returns
    ``(params, final loss)``.
    """
    v = np.asarray(values, dtype=np.float64).reshape(-1)
    if v.size == 0:
        raise ValueError("need at least one value")
    p = init_codec(k=k, d=d, seed=seed) if params is None else params.copy()
    arrays = _param_arrays(p)
    with np.errstate(over="ignore", invalid="ignore"):  # blow-ups surface as Divergence
        for taken in range(steps):
            loss, (eW, eb, dW, db) = autoencoder_loss_and_grads(p, v)
            if not math.isfinite(loss):
                raise Divergence(f"loss became {loss} at step {taken}")
            if target_loss is not None and loss < target_loss:
                return p, loss
            for arr, g in zip(arrays, eW + eb + dW + db):
                arr -= learning_rate * g
        loss = autoencoder_loss_and_grads(p, v)[0]
    if not math.isfinite(loss):
        raise Divergence(f"loss became {loss}")
    return p, loss


# --------------------------------------------------------------------------
# checkpoints: flat little-endian float64 blob + JSON sidecar


def _tensor_names(params: NumberCodecParams):
    for part in ("encoder", "decoder"):
        mlp = getattr(params, part)
        for i in range(len(mlp.weights)):
            yield f"{part}.W{i + 1}", mlp.weights[i]
            yield f"{part}.b{i + 1}", mlp.biases[i]


def save_checkpoint(params: NumberCodecParams, path) -> tuple[Path, Path]:
    path = Path(path)
    blob_path = path.with_suffix(".bin")
    meta_path = path.with_suffix(".json")
    tensors, chunks, offset = [], [], 0
    for name, arr in _tensor_names(params):
        tensors.append({"name": name, "shape": list(arr.shape), "offset": offset})
        chunks.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        offset += arr.size
    meta = {
        "format": "svgnum-number-codec",
        "version": 1,
        "dtype": "<f8",
        "k": params.fourier.k,
        "d": params.d,
        "M": params.M,
        "noise_sigma": params.noise_sigma,
        "encoder_dims": params.encoder.layer_dims,
        "decoder_dims": params.decoder.layer_dims,
        "activation": "gelu_tanh",
        "tensors": tensors,
        "count": offset,
    }
    blob_path.write_bytes(b"".join(chunks))
    meta_path.write_text(json.dumps(meta, indent=2) + "\n")
    return blob_path, meta_path


def load_checkpoint(path) -> NumberCodecParams:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    flat = np.frombuffer(path.with_suffix(".bin").read_bytes(), dtype="<f8").astype(np.float64)
    if flat.size != meta["count"]:
        raise ValueError(f"checkpoint holds {flat.size} values, sidecar says {meta['count']}")
    parts = {"encoder": ([], []), "decoder": ([], [])}
    for t in meta["tensors"]:
        size = int(np.prod(t["shape"]))
        arr = flat[t["offset"]:t["offset"] + size].reshape(t["shape"]).copy()
        part, name = t["name"].split(".")
        parts[part][0 if name.startswith("W") else 1].append(arr)
    return NumberCodecParams(
        FourierConfig(meta["k"]),
        MlpParams(*parts["encoder"]),
        MlpParams(*parts["decoder"]),
        meta["M"],
        meta["noise_sigma"],
    )
