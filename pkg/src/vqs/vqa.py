"""Multiple-choice classifier: one sigmoid MLP scored per candidate answer.

Each question carries 18 candidate answers; every (question, candidate)
pair becomes a binary example over the concatenated image/question/answer
(and optional attention) features, and prediction takes the argmax of the
18 decision values. Ensembling combines several models' decision values
with a convex weighting tuned on validation accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import parse_number
from .errors import DimMismatch, IdMismatch, IncompleteCandidates, SimplexViolation
from .optim import AdamState, TrainConfig, adam_step, init_params, make_batches

N_CANDIDATES = 18
DEFAULT_HIDDEN = 8096
ANSWER_BUCKETS = ("yes/no", "number", "others")


@dataclass
class MlpParams:
    W1: np.ndarray  # (input_dim, hidden)
    W2: np.ndarray  # (hidden,)
    b: np.ndarray   # (1,)

    def to_dict(self) -> dict[str, np.ndarray]:
        return {"W1": self.W1, "W2": self.W2, "b": self.b}

    @classmethod
    def from_dict(cls, d: dict[str, np.ndarray]) -> "MlpParams":
        return cls(W1=d["W1"], W2=d["W2"], b=d["b"].reshape(1))


@dataclass
class ChoiceItem:
    question_id: int
    candidate_index: int
    x: np.ndarray
    label: int


def init_mlp_params(input_dim: int, hidden: int = DEFAULT_HIDDEN, seed: int = 0) -> MlpParams:
    return MlpParams.from_dict(
        init_params({"W1": (input_dim, hidden), "W2": (hidden,), "b": (1,)}, seed=seed)
    )


def sigmoid(z):
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _logits(x_matrix: np.ndarray, params: MlpParams):
    if x_matrix.shape[1] != params.W1.shape[0]:
        raise DimMismatch(f"input dim {x_matrix.shape[1]} vs W1 rows {params.W1.shape[0]}")
    z = x_matrix @ params.W1
    a = np.maximum(z, 0.0)
    return a @ params.W2 + params.b[0], z, a


def mlp_forward(x, params: MlpParams) -> float:
    """sigmoid(W2 . relu(W1 x) + b), strictly inside (0, 1)."""
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    logit, _, _ = _logits(x, params)
    return float(sigmoid(logit)[0])


def mlp_forward_batch(x_matrix, params: MlpParams) -> np.ndarray:
    logit, _, _ = _logits(np.asarray(x_matrix, dtype=np.float64), params)
    return sigmoid(logit)


def bce_loss(y: float, label: int) -> float:
    """Binary cross entropy of a sigmoid score against a 0/1 label."""
    return float(-label * np.log(y) - (1 - label) * np.log(1 - y))


def mlp_loss_and_grads(x_matrix, labels, params: MlpParams):
    """Mean BCE over a batch plus analytic gradients."""
    x_matrix = np.asarray(x_matrix, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    n = x_matrix.shape[0]
    logit, z, a = _logits(x_matrix, params)
    y = sigmoid(logit)
    loss = float(np.mean(-labels * np.log(y) - (1.0 - labels) * np.log(1.0 - y)))
    d_logit = (y - labels) / n
    d_z = d_logit[:, None] * params.W2[None, :] * (z > 0)
    grads = {
        "W1": x_matrix.T @ d_z,
        "W2": a.T @ d_logit,
        "b": np.array([d_logit.sum()]),
    }
    return loss, grads


def group_choice_items(items) -> dict[int, list[ChoiceItem]]:
    """Group per question, candidate order 0..17, one positive label each."""
    groups: dict[int, dict[int, ChoiceItem]] = {}
    for item in items:
        groups.setdefault(item.question_id, {})[item.candidate_index] = item
    out = {}
    for qid, by_idx in groups.items():
        if sorted(by_idx) != list(range(N_CANDIDATES)):
            raise IncompleteCandidates(
                f"question {qid} has candidates {sorted(by_idx)}, expected 0..{N_CANDIDATES - 1}"
            )
        ordered = [by_idx[i] for i in range(N_CANDIDATES)]
        if sum(i.label for i in ordered) != 1:
            raise IncompleteCandidates(f"question {qid} must have exactly one positive candidate")
        out[qid] = ordered
    return out


def predict_choice(items, params: MlpParams) -> int:
    """Argmax candidate of one question's 18 scores, lowest index on ties."""
    by_idx = {i.candidate_index: i for i in items}
    if sorted(by_idx) != list(range(N_CANDIDATES)):
        raise IncompleteCandidates(f"got candidates {sorted(by_idx)}, expected 0..{N_CANDIDATES - 1}")
    x = np.stack([by_idx[i].x for i in range(N_CANDIDATES)])
    scores = mlp_forward_batch(x, params)
    return int(np.argmax(scores))


def accuracy(predictions: dict[int, int], truth: dict[int, int]) -> float:
    """Fraction of questions whose predicted candidate matches the label."""
    if set(predictions) != set(truth):
        raise IdMismatch(
            f"prediction ids and truth ids differ: {sorted(set(predictions) ^ set(truth))[:5]}"
        )
    if not truth:
        return 0.0
    return sum(1 for qid, idx in truth.items() if predictions[qid] == idx) / len(truth)


def train_mlp(items, config: TrainConfig, lr: float = 0.001,
              hidden: int = DEFAULT_HIDDEN, params: MlpParams | None = None):
    """Adam-train on all candidates of every question; returns (params, history)."""
    groups = group_choice_items(items)
    flat = [item for qid in groups for item in groups[qid]]
    x_all = np.stack([i.x for i in flat]).astype(np.float64)
    y_all = np.array([i.label for i in flat], dtype=np.float64)
    if params is None:
        params = init_mlp_params(x_all.shape[1], hidden=hidden, seed=config.seed)
    pdict = params.to_dict()
    state = AdamState(lr=lr)
    history = []
    for epoch in range(config.epochs):
        losses = []
        for batch in make_batches(len(flat), config, epoch=epoch):
            loss, grads = mlp_loss_and_grads(x_all[batch], y_all[batch], params)
            losses.append(loss)
            adam_step(pdict, grads, state)
        history.append(float(np.mean(losses)))
    return params, history


def predictions_from_scores(scores: np.ndarray) -> np.ndarray:
    """Per-question argmax over candidate columns, lowest index on ties."""
    return np.argmax(np.asarray(scores), axis=1)


def scores_accuracy(scores: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean(predictions_from_scores(scores) == np.asarray(labels)))


@dataclass
class EnsembleWeights:
    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-6:
            raise SimplexViolation(f"weights {self.weights} are not a simplex point")


def apply_ensemble(model_scores, weights: EnsembleWeights) -> np.ndarray:
    """Convex combination of the models' decision values."""
    stack = [np.asarray(s, dtype=np.float64) for s in model_scores]
    if len(stack) != weights.weights.size:
        raise SimplexViolation(f"{len(stack)} models vs {weights.weights.size} weights")
    return sum(w * s for w, s in zip(weights.weights, stack))


GRID_STEP = 0.05


def tune_ensemble(model_scores, labels) -> EnsembleWeights:
    """Coordinate ascent over the simplex grid maximizing validation accuracy.

    Starts from the best single model (all corners examined first), moves
    only on strict improvement, so duplicates keep the first examined point
    and the result is never worse than the best single model.
    """
    stack = [np.asarray(s, dtype=np.float64) for s in model_scores]
    labels = np.asarray(labels)
    n_models = len(stack)
    if n_models == 0:
        raise SimplexViolation("ensemble needs at least one model")

    def acc(w):
        return scores_accuracy(sum(wi * si for wi, si in zip(w, stack)), labels)

    best_w = np.zeros(n_models)
    best_w[0] = 1.0
    best_acc = acc(best_w)
    for m in range(1, n_models):
        w = np.zeros(n_models)
        w[m] = 1.0
        a = acc(w)
        if a > best_acc:
            best_acc, best_w = a, w

    grid = np.round(np.arange(0.0, 1.0 + GRID_STEP / 2, GRID_STEP), 10)
    for _ in range(100):
        improved = False
        for i in range(n_models):
            for v in grid:
                w = best_w.copy()
                rest = w.sum() - w[i]
                if rest > 0:
                    scale = (1.0 - v) / rest
                    w *= scale
                else:
                    w[:] = (1.0 - v) / max(n_models - 1, 1)
                w[i] = v
                a = acc(w)
                if a > best_acc + 1e-12:
                    best_acc, best_w, improved = a, w, True
        if not improved:
            break
    return EnsembleWeights(weights=best_w / best_w.sum())


def bucket_of_answer(answer: str) -> str:
    """Table-2 style buckets by answer text: yes/no, number, others."""
    s = answer.strip().lower()
    if s in ("yes", "no"):
        return "yes/no"
    if parse_number(s) is not None:
        return "number"
    return "others"


def accuracy_by_bucket(predictions: dict[int, int], truth: dict[int, int],
                       answers: dict[int, str]) -> dict[str, float | None]:
    """Overall accuracy plus one entry per answer bucket (None when empty)."""
    out: dict[str, float | None] = {"all": accuracy(predictions, truth)}
    for bucket in ANSWER_BUCKETS:
        qids = [qid for qid in truth if bucket_of_answer(answers[qid]) == bucket]
        if not qids:
            out[bucket] = None
            continue
        out[bucket] = sum(1 for qid in qids if predictions[qid] == truth[qid]) / len(qids)
    return out
