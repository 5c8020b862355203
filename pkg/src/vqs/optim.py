"""Shared training machinery: Adam, batching, gradient checking, checkpoints.

Model parameters are dicts of named float64 arrays; every trainer in the
package funnels its updates through adam_step so determinism is a single
code path. Checkpoints are a named-tensor container: magic "VQSP",
version u32, tensor count u32, then per tensor name length u32 + UTF-8
name + ndim u32 + dims u64 + float32 data, little-endian.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BadMagic, ShapeMismatch, TruncatedFile

CKPT_MAGIC = b"VQSP"
CKPT_VERSION = 1
_ADAM_PREFIX = "__adam__/"


@dataclass
class AdamState:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


@dataclass
class TrainConfig:
    batch_size: int = 16
    epochs: int = 1
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.batch_size < 1:
            raise ShapeMismatch(f"batch_size must be >= 1, got {self.batch_size}")


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray], state: AdamState):
    """One Adam update, in place; returns (params, state)."""
    state.step += 1
    t = state.step
    bias1 = 1.0 - state.beta1 ** t
    bias2 = 1.0 - state.beta2 ** t
    for name, theta in params.items():
        g = grads[name]
        if g.shape != theta.shape:
            raise ShapeMismatch(f"grad for '{name}' has shape {g.shape}, param {theta.shape}")
        m = state.m.setdefault(name, np.zeros_like(theta))
        v = state.v.setdefault(name, np.zeros_like(theta))
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        theta -= state.lr * (m / bias1) / (np.sqrt(v / bias2) + state.eps)
    return params, state


def grad_check(loss_fn, params: dict[str, np.ndarray], h: float = 1e-3) -> float:
    """Max relative error between analytic and central-difference gradients.

    `loss_fn(params)` must return (loss, grads). The numeric side re-runs
    the loss only, so the comparison stays independent of the analytic
    gradient code.
    """
    _, grads = loss_fn(params)
    worst = 0.0
    for name, theta in params.items():
        analytic = grads[name]
        flat = theta.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + h
            up, _ = loss_fn(params)
            flat[k] = orig - h
            down, _ = loss_fn(params)
            flat[k] = orig
            numeric = (up - down) / (2.0 * h)
            a = float(analytic.reshape(-1)[k])
            err = abs(a - numeric) / max(1e-8, abs(a) + abs(numeric))
            worst = max(worst, err)
    return worst


def make_batches(n: int, config: TrainConfig, epoch: int = 0) -> list[np.ndarray]:
    """Index batches for one epoch; every index appears exactly once."""
    order = np.arange(n)
    if config.shuffle:
        order = np.random.default_rng([config.seed, epoch]).permutation(n)
    return [order[i:i + config.batch_size] for i in range(0, n, config.batch_size)]


def init_params(shapes: dict[str, tuple], seed: int, scale: float = 0.05) -> dict[str, np.ndarray]:
    """Seeded uniform(-scale, scale) initialization for named tensors."""
    rng = np.random.default_rng(seed)
    return {name: rng.uniform(-scale, scale, size=shape) for name, shape in shapes.items()}


def save_checkpoint(path, params: dict[str, np.ndarray], adam: AdamState | None = None):
    """Write named tensors, appending the Adam state when given."""
    tensors = dict(params)
    if adam is not None:
        tensors[_ADAM_PREFIX + "meta"] = np.asarray(
            [adam.step, adam.lr, adam.beta1, adam.beta2, adam.eps]
        )
        for name, m in adam.m.items():
            tensors[_ADAM_PREFIX + "m/" + name] = m
        for name, v in adam.v.items():
            tensors[_ADAM_PREFIX + "v/" + name] = v
    with open(path, "wb") as fh:
        fh.write(CKPT_MAGIC)
        fh.write(struct.pack("<II", CKPT_VERSION, len(tensors)))
        for name, arr in tensors.items():
            arr = np.ascontiguousarray(arr, dtype=np.float32)
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
            fh.write(arr.astype("<f4").tobytes())


def load_checkpoint(path):
    """Read named tensors; returns (params, AdamState or None), float64."""
    blob = Path(path).read_bytes()
    if blob[:4] != CKPT_MAGIC:
        raise BadMagic(f"{path} does not start with {CKPT_MAGIC!r}")
    offset = 4
    try:
        version, count = struct.unpack_from("<II", blob, offset)
        offset += 8
        if version != CKPT_VERSION:
            raise BadMagic(f"{path} has unsupported version {version}")
        tensors = {}
        for _ in range(count):
            (name_len,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            name = blob[offset:offset + name_len].decode("utf-8")
            offset += name_len
            (ndim,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            shape = struct.unpack_from(f"<{ndim}Q", blob, offset)
            offset += 8 * ndim
            size = int(np.prod(shape)) if ndim else 1
            if offset + 4 * size > len(blob):
                raise TruncatedFile(f"{path} ends inside tensor '{name}'")
            arr = np.frombuffer(blob, dtype="<f4", count=size, offset=offset)
            offset += 4 * size
            tensors[name] = arr.reshape(shape).astype(np.float64)
    except struct.error as exc:
        raise TruncatedFile(f"{path}: {exc}") from exc

    params = {k: v for k, v in tensors.items() if not k.startswith(_ADAM_PREFIX)}
    adam = None
    meta = tensors.get(_ADAM_PREFIX + "meta")
    if meta is not None:
        adam = AdamState(
            lr=float(meta[1]), beta1=float(meta[2]), beta2=float(meta[3]),
            eps=float(meta[4]), step=int(round(float(meta[0]))),
        )
        for key, arr in tensors.items():
            if key.startswith(_ADAM_PREFIX + "m/"):
                adam.m[key[len(_ADAM_PREFIX) + 2:]] = arr
            elif key.startswith(_ADAM_PREFIX + "v/"):
                adam.v[key[len(_ADAM_PREFIX) + 2:]] = arr
    return params, adam
