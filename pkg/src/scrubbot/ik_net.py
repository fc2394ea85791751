"""Learned inverse kinematics with elasticity: (pose, tension) -> tendon lengths.

A two-hidden-layer ReLU network trained with Adam on z-scored inputs and
targets. Everything is plain numpy so results are reproducible bit for bit
on one machine for a fixed seed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

N_IN = 8
N_OUT = 9
FORMAT_VERSION = 1
MAGIC = "scrubbot-iknet"


class DivergenceError(RuntimeError):
    pass


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    hidden_width: int = 128
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 16
    epochs: int = 50
    lr_decay_gamma: float = 0.9
    seed: int = 42

    def __post_init__(self):
        for name in ("hidden_width", "learning_rate", "batch_size", "epochs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.lr_decay_gamma <= 1:
            raise ValueError("lr_decay_gamma must be in (0, 1]")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must be in [0, 1)")

    def lr_at(self, epoch: int) -> float:
        return self.learning_rate * self.lr_decay_gamma ** epoch


@dataclass
class Normalizer:
    """Per-feature z-scoring. Constant features get scale 0 and are ignored."""

    in_mean: np.ndarray
    in_scale: np.ndarray  # multiplies (x - mean); 1/std, or 0 for constant features
    out_mean: np.ndarray
    out_std: np.ndarray

    @classmethod
    def identity(cls) -> "Normalizer":
        return cls(np.zeros(N_IN), np.ones(N_IN), np.zeros(N_OUT), np.ones(N_OUT))

    @classmethod
    def fit(cls, inputs: np.ndarray, targets: np.ndarray) -> "Normalizer":
        inputs = prepare_inputs(inputs)
        in_mean = inputs.mean(axis=0)
        in_std = inputs.std(axis=0)
        const = in_std <= 1e-12 * np.maximum(1.0, np.abs(in_mean))
        in_scale = np.where(const, 0.0, 1.0 / np.where(const, 1.0, in_std))
        out_mean = targets.mean(axis=0)
        out_std = targets.std(axis=0)
        out_std = np.where(out_std <= 1e-12 * np.maximum(1.0, np.abs(out_mean)), 1.0, out_std)
        return cls(in_mean, in_scale, out_mean, out_std)

    def encode_inputs(self, inputs: np.ndarray) -> np.ndarray:
        return (prepare_inputs(inputs) - self.in_mean) * self.in_scale

    def encode_targets(self, targets: np.ndarray) -> np.ndarray:
        return (targets - self.out_mean) / self.out_std

    def decode_targets(self, z: np.ndarray) -> np.ndarray:
        return z * self.out_std + self.out_mean


@dataclass
class MLPParams:
    weights: list[np.ndarray]  # W[k] has shape (fan_in, fan_out)
    biases: list[np.ndarray]
    norm: Normalizer = field(default_factory=Normalizer.identity)

    def __post_init__(self):
        if len(self.weights) != 3 or len(self.biases) != 3:
            raise ValueError("expected three layers")
        sizes = self.layer_sizes
        if sizes[0] != N_IN or sizes[-1] != N_OUT:
            raise ValueError(f"layer sizes must run {N_IN} -> ... -> {N_OUT}, got {sizes}")
        for w, b, w_next in zip(self.weights, self.biases, self.weights[1:] + [None]):
            if b.shape != (w.shape[1],):
                raise ValueError("bias shape does not match weight matrix")
            if w_next is not None and w_next.shape[0] != w.shape[1]:
                raise ValueError("consecutive weight matrices do not chain")

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def arrays(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]

    def copy(self) -> "MLPParams":
        return MLPParams([w.copy() for w in self.weights], [b.copy() for b in self.biases],
                         Normalizer(*(a.copy() for a in (self.norm.in_mean, self.norm.in_scale,
                                                         self.norm.out_mean, self.norm.out_std))))

    def predict(self, inputs) -> np.ndarray:
        return forward(self, inputs)


def init_params(hidden: int, rng: np.random.Generator,
                norm: Normalizer | None = None) -> MLPParams:
    """Glorot-uniform weights, zero biases."""
    sizes = [N_IN, hidden, hidden, N_OUT]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MLPParams(weights, biases, norm or Normalizer.identity())


def prepare_inputs(inputs) -> np.ndarray:
    """Normalise and sign-canonicalise the quaternion part of each input row."""
    x = np.array(inputs, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != N_IN:
        raise ValueError(f"inputs must have {N_IN} columns, got {x.shape[1]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite network input")
    quat = x[:, 3:7]
    norms = np.linalg.norm(quat, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ValueError("zero quaternion in network input")
    quat = quat / norms
    quat *= np.where(quat[:, :1] < 0, -1.0, 1.0)
    x[:, 3:7] = quat
    return x[0] if single else x


def _forward_normalized(params: MLPParams, z: np.ndarray):
    w1, w2, w3 = params.weights
    b1, b2, b3 = params.biases
    a1 = z @ w1 + b1
    h1 = np.maximum(a1, 0.0)
    a2 = h1 @ w2 + b2
    h2 = np.maximum(a2, 0.0)
    out = h2 @ w3 + b3
    return out, (a1, h1, a2, h2)


def forward(params: MLPParams, inputs) -> np.ndarray:
    """Tendon lengths (mm) for one input row or a batch of rows."""
    x = np.asarray(inputs, dtype=float)
    single = x.ndim == 1
    z = params.norm.encode_inputs(np.atleast_2d(x))
    out, _ = _forward_normalized(params, z)
    out = params.norm.decode_targets(out)
    return out[0] if single else out


def loss_mse(pred, target) -> float:
    pred, target = np.asarray(pred, dtype=float), np.asarray(target, dtype=float)
    return float(np.mean((pred - target) ** 2))


def gradient(params: MLPParams, z_in: np.ndarray, z_target: np.ndarray):
    """Loss and exact gradients of batch-mean MSE in normalised space.

    Returns ``(loss, grads)`` with ``grads`` ordered like ``params.arrays``.
    """
    z_in = np.atleast_2d(z_in)
    z_target = np.atleast_2d(z_target)
    if len(z_in) == 0:
        raise ValueError("empty batch")
    out, (a1, h1, a2, h2) = _forward_normalized(params, z_in)
    resid = out - z_target
    loss = float(np.mean(resid ** 2))
    d_out = 2.0 * resid / resid.size
    w1, w2, w3 = params.weights
    g_w3 = h2.T @ d_out
    g_b3 = d_out.sum(axis=0)
    d_a2 = (d_out @ w3.T) * (a2 > 0)
    g_w2 = h1.T @ d_a2
    g_b2 = d_a2.sum(axis=0)
    d_a1 = (d_a2 @ w2.T) * (a1 > 0)
    g_w1 = z_in.T @ d_a1
    g_b1 = d_a1.sum(axis=0)
    return loss, [g_w1, g_w2, g_w3, g_b1, g_b2, g_b3]


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, params: MLPParams) -> "AdamState":
        return cls([np.zeros_like(a) for a in params.arrays],
                   [np.zeros_like(a) for a in params.arrays])


def adam_step(params: MLPParams, grads, state: AdamState, t: int, config: TrainConfig,
              epoch: int = 0) -> None:
    """One in-place Adam update at step ``t`` (1-based) with annealed step size."""
    if t < 1:
        raise ValueError("Adam step index starts at 1")
    lr = config.lr_at(epoch)
    b1, b2 = config.beta1, config.beta2
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t
    for p, g, m, v in zip(params.arrays, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= lr * (m / c1) / (np.sqrt(v / c2) + config.eps)
    state.t = t


@dataclass
class History:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    learning_rate: list[float] = field(default_factory=list)


def train(train_inputs: np.ndarray, train_targets: np.ndarray,
          val_inputs: np.ndarray | None = None, val_targets: np.ndarray | None = None,
          config: TrainConfig = TrainConfig(), progress=None) -> tuple[MLPParams, History]:
    """Fit the network; normalisation statistics come from the training split only.

    ``progress`` is called as ``progress(epoch, train_loss, val_loss)`` if given.
    """
    train_inputs = np.atleast_2d(np.asarray(train_inputs, dtype=float))
    train_targets = np.atleast_2d(np.asarray(train_targets, dtype=float))
    rng = np.random.default_rng(config.seed)
    norm = Normalizer.fit(train_inputs, train_targets)
    params = init_params(config.hidden_width, rng, norm)
    z_in = norm.encode_inputs(train_inputs)
    z_tg = norm.encode_targets(train_targets)
    have_val = val_inputs is not None and len(val_inputs) > 0
    if have_val:
        zv_in = norm.encode_inputs(np.atleast_2d(val_inputs))
        zv_tg = norm.encode_targets(np.atleast_2d(val_targets))

    state = AdamState.zeros_like(params)
    history = History()
    n = len(z_in)
    t = 0
    for epoch in range(config.epochs):
        perm = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = perm[start:start + config.batch_size]
            loss, grads = gradient(params, z_in[idx], z_tg[idx])
            if not math.isfinite(loss):
                raise DivergenceError(f"non-finite loss in epoch {epoch}")
            t += 1
            adam_step(params, grads, state, t, config, epoch)
            total += loss * len(idx)
        train_loss = total / n
        val_loss = (loss_mse(_forward_normalized(params, zv_in)[0], zv_tg)
                    if have_val else float("nan"))
        if not math.isfinite(train_loss) or (have_val and not math.isfinite(val_loss)):
            raise DivergenceError(f"non-finite loss after epoch {epoch}")
        history.train_loss.append(train_loss)
        history.val_loss.append(val_loss)
        history.learning_rate.append(config.lr_at(epoch))
        if progress is not None:
            progress(epoch, train_loss, val_loss)
        log.debug("epoch %d train %.3e val %.3e", epoch, train_loss, val_loss)
    return params, history


def _fmt_row(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def save_model(params: MLPParams, path, meta: dict | None = None) -> None:
    """Text dump: header, normalisation block, then each array row-major."""
    lines = [f"{MAGIC} {FORMAT_VERSION}", "layers " + " ".join(map(str, params.layer_sizes))]
    lines += [f"# {k}={v}" for k, v in (meta or {}).items()]
    norm = params.norm
    for name, arr in (("in_mean", norm.in_mean), ("in_scale", norm.in_scale),
                      ("out_mean", norm.out_mean), ("out_std", norm.out_std)):
        lines.append(f"[{name}]")
        lines.append(_fmt_row(arr))
    for k, (w, b) in enumerate(zip(params.weights, params.biases), 1):
        lines.append(f"[W{k}] {w.shape[0]} {w.shape[1]}")
        lines.extend(_fmt_row(row) for row in w)
        lines.append(f"[b{k}]")
        lines.append(_fmt_row(b))
    lines.append("[end]")
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path) -> MLPParams:
    raw = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    it = iter(raw)

    def next_line(section):
        try:
            return next(it)
        except StopIteration:
            raise ModelFormatError(f"{path}: truncated, missing section {section}") from None

    head = next_line("header").split()
    if len(head) != 2 or head[0] != MAGIC:
        raise ModelFormatError(f"{path}: not a model file")
    if head[1] != str(FORMAT_VERSION):
        raise ModelFormatError(f"{path}: format version {head[1]}, expected {FORMAT_VERSION}")
    layers = next_line("layers").split()
    if layers[0] != "layers":
        raise ModelFormatError(f"{path}: missing layers line")
    sizes = [int(s) for s in layers[1:]]
    if len(sizes) != 4:
        raise ModelFormatError(f"{path}: expected 4 layer sizes, got {sizes}")

    def read_vec(section, n):
        tag = next_line(section)
        if tag.split()[0] != f"[{section}]":
            raise ModelFormatError(f"{path}: expected section [{section}], found {tag!r}")
        vec = np.array([float(v) for v in next_line(section).split()])
        if vec.shape != (n,):
            raise ModelFormatError(f"{path}: section [{section}] has {vec.size} values, expected {n}")
        return vec

    norm = Normalizer(read_vec("in_mean", sizes[0]), read_vec("in_scale", sizes[0]),
                      read_vec("out_mean", sizes[-1]), read_vec("out_std", sizes[-1]))
    weights, biases = [], []
    for k in range(1, 4):
        section = f"W{k}"
        tag = next_line(section).split()
        if tag[0] != f"[{section}]" or [int(v) for v in tag[1:]] != sizes[k - 1:k + 1]:
            raise ModelFormatError(f"{path}: bad or missing section [{section}]")
        rows = [[float(v) for v in next_line(section).split()] for _ in range(sizes[k - 1])]
        w = np.array(rows)
        if w.shape != (sizes[k - 1], sizes[k]):
            raise ModelFormatError(f"{path}: section [{section}] has wrong shape {w.shape}")
        weights.append(w)
        biases.append(read_vec(f"b{k}", sizes[k]))
    if next_line("end").strip() != "[end]":
        raise ModelFormatError(f"{path}: missing section [end]")
    return MLPParams(weights, biases, norm)
