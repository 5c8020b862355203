"""Region attention supervised by mask-derived probability grids.

A question vector and per-region features produce a softmax weighting over
the g*g image regions; training matches those weights to the l1-normalized
downsampled ground-truth mask with a cross-entropy loss. The weighted
region sum plus a learned projection of the question forms the attention
feature vector consumed by the multiple-choice classifier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import ground_truth_mask
from .errors import DimMismatch, MissingFeatures
from .masks import downsample_to_grid, normalize_l1
from .optim import AdamState, TrainConfig, adam_step, init_params, make_batches

DEFAULT_GRID = 14
DEFAULT_HIDDEN = 512


@dataclass
class RegionGrid:
    """Row-major per-region features; region i maps to grid cell (i//g, i%g)."""

    g: int
    features: np.ndarray  # (g*g, d)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2 or self.features.shape[0] != self.g * self.g:
            raise DimMismatch(
                f"region features shape {self.features.shape} does not match g={self.g}"
            )


@dataclass
class AttentionParams:
    W_r: np.ndarray  # (d, h)
    W_q: np.ndarray  # (q_dim, h)
    w: np.ndarray    # (h,)
    P_q: np.ndarray  # (q_dim, d) question projection added to the region sum

    @property
    def hidden(self) -> int:
        return self.w.size

    def to_dict(self) -> dict[str, np.ndarray]:
        return {"W_r": self.W_r, "W_q": self.W_q, "w": self.w, "P_q": self.P_q}

    @classmethod
    def from_dict(cls, d: dict[str, np.ndarray]) -> "AttentionParams":
        return cls(W_r=d["W_r"], W_q=d["W_q"], w=d["w"], P_q=d["P_q"])


@dataclass
class AttentionOutput:
    weights: np.ndarray  # (g*g,) simplex
    x_att: np.ndarray    # (d,)


def init_attention_params(d: int, q_dim: int, hidden: int = DEFAULT_HIDDEN, seed: int = 0) -> AttentionParams:
    return AttentionParams.from_dict(
        init_params(
            {"W_r": (d, hidden), "W_q": (q_dim, hidden), "w": (hidden,), "P_q": (q_dim, d)},
            seed=seed,
        )
    )


def softmax(scores: np.ndarray) -> np.ndarray:
    e = np.exp(scores - scores.max())
    return e / e.sum()


def _hidden_activations(q, regions: RegionGrid, params: AttentionParams):
    q = np.asarray(q, dtype=np.float64)
    if regions.features.shape[1] != params.W_r.shape[0]:
        raise DimMismatch(
            f"region dim {regions.features.shape[1]} vs W_r rows {params.W_r.shape[0]}"
        )
    if q.size != params.W_q.shape[0]:
        raise DimMismatch(f"question dim {q.size} vs W_q rows {params.W_q.shape[0]}")
    return np.tanh(regions.features @ params.W_r + q @ params.W_q)


def attention_forward(q, regions: RegionGrid, params: AttentionParams) -> AttentionOutput:
    """Score each region against the question; weights form a simplex."""
    q = np.asarray(q, dtype=np.float64)
    hidden = _hidden_activations(q, regions, params)
    p = softmax(hidden @ params.w)
    x_att = p @ regions.features + q @ params.P_q
    return AttentionOutput(weights=p, x_att=x_att)


def attention_target(record, segments, image, g: int) -> np.ndarray:
    """Downsample the record's ground-truth mask to g x g and l1-normalize.

    An empty mask (everything off-image) normalizes to the uniform grid.
    """
    mask = ground_truth_mask(record, segments, image)
    return normalize_l1(downsample_to_grid(mask, g))


def attention_loss(p: np.ndarray, target: np.ndarray) -> float:
    """Cross entropy -sum(t * log p); target may be a grid or flat."""
    t = np.asarray(target, dtype=np.float64).reshape(-1)
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    return float(-(t * np.log(p)).sum())


def attention_loss_and_grads(q, regions: RegionGrid, target, params: AttentionParams):
    """Analytic gradients of the cross-entropy through the softmax scorer."""
    q = np.asarray(q, dtype=np.float64)
    t = np.asarray(target, dtype=np.float64).reshape(-1)
    hidden = _hidden_activations(q, regions, params)
    p = softmax(hidden @ params.w)
    loss = float(-(t * np.log(p)).sum())

    d_scores = p - t
    d_hidden = (d_scores[:, None] * params.w[None, :]) * (1.0 - hidden * hidden)
    grads = {
        "W_r": regions.features.T @ d_hidden,
        "W_q": np.outer(q, d_hidden.sum(axis=0)),
        "w": hidden.T @ d_scores,
        "P_q": np.zeros_like(params.P_q),  # x_att does not enter this loss
    }
    return loss, grads


@dataclass
class AttentionExample:
    question_id: int
    q: np.ndarray
    regions: RegionGrid
    target: np.ndarray  # flat, length g*g


def build_attention_examples(dataset, targets, region_store, question_vectors, g: int) -> list[AttentionExample]:
    """Join records with their targets, region features, and question vectors.

    `targets` maps question_id to a flat or grid target; `region_store` is a
    feature store keyed by image_id whose rows flatten a (g*g, d) grid;
    `question_vectors` maps question_id to the embedded question.
    """
    if region_store.dim % (g * g) != 0:
        raise DimMismatch(f"region store dim {region_store.dim} is not divisible by g*g={g * g}")
    d = region_store.dim // (g * g)
    out = []
    for qid, rec in dataset.records.items():
        if rec.flag != "none":
            continue
        if qid not in targets:
            raise MissingFeatures(f"no attention target for question {qid}")
        if rec.image_id not in region_store:
            raise MissingFeatures(f"no region features for image {rec.image_id}")
        if qid not in question_vectors:
            raise MissingFeatures(f"no question vector for question {qid}")
        grid = RegionGrid(g=g, features=region_store.vector(rec.image_id).astype(np.float64).reshape(g * g, d))
        out.append(
            AttentionExample(
                question_id=qid,
                q=np.asarray(question_vectors[qid], dtype=np.float64),
                regions=grid,
                target=np.asarray(targets[qid], dtype=np.float64).reshape(-1),
            )
        )
    return out


def train_attention(
    examples: list[AttentionExample],
    config: TrainConfig,
    lr: float = 0.001,
    hidden: int = DEFAULT_HIDDEN,
    params: AttentionParams | None = None,
):
    """Adam-train the attention scorer; returns (params, mean loss per epoch)."""
    if not examples:
        raise MissingFeatures("no training examples")
    d = examples[0].regions.features.shape[1]
    q_dim = examples[0].q.size
    if params is None:
        params = init_attention_params(d, q_dim, hidden=hidden, seed=config.seed)
    pdict = params.to_dict()
    state = AdamState(lr=lr)
    history = []
    for epoch in range(config.epochs):
        epoch_losses = []
        for batch in make_batches(len(examples), config, epoch=epoch):
            total = {name: np.zeros_like(arr) for name, arr in pdict.items()}
            for idx in batch:
                ex = examples[idx]
                loss, grads = attention_loss_and_grads(ex.q, ex.regions, ex.target, params)
                epoch_losses.append(loss)
                for name in total:
                    total[name] += grads[name]
            scaled = {name: g / len(batch) for name, g in total.items()}
            adam_step(pdict, scaled, state)
        history.append(float(np.mean(epoch_losses)))
    return params, history
