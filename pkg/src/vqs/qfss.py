"""Question-focused segmentation by proposal aggregation.

A question vector scores N segmentation proposals through a bilinear form
softmaxed into convex weights; the weighted mask sum, thresholded, is the
predicted visual answer. Training minimizes mean squared error between
the soft mask and the annotated ground truth. The oracle upper bound
swaps proposals for true instance segmentations and reduces the task to
binary inclusion classification with the multiple-choice MLP.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import QUESTION_TYPES, classify_question, ground_truth_mask
from .errors import DimensionMismatch, DimMismatch, MissingPrediction, MissingProposals
from .masks import RleMask, aggregate, iou, rle_decode, threshold
from .optim import AdamState, TrainConfig, adam_step, make_batches
from .vqa import MlpParams, init_mlp_params, mlp_forward_batch, mlp_loss_and_grads

DEFAULT_N_PROPOSALS = 25
DEFAULT_TAU = 0.5
TAU_SCAN = tuple(np.round(np.arange(0.1, 0.91, 0.1), 10))


@dataclass
class ProposalSet:
    """Proposal masks plus their feature rows for one image.

    Masks may be given decoded (list of bool arrays) or as RleMask values;
    RLE input decodes lazily and is cached.
    """

    image_id: int
    proposals: list
    features: np.ndarray  # (N, d_z)
    _masks: list = field(default=None, repr=False)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if len(self.proposals) != self.features.shape[0]:
            raise DimensionMismatch(
                f"{len(self.proposals)} proposals vs {self.features.shape[0]} feature rows"
            )

    @property
    def n(self) -> int:
        return len(self.proposals)

    def masks(self) -> list:
        if self._masks is None:
            self._masks = [
                rle_decode(p) if isinstance(p, RleMask) else np.asarray(p, dtype=bool)
                for p in self.proposals
            ]
            shapes = {m.shape for m in self._masks}
            if len(shapes) > 1:
                raise DimensionMismatch(f"proposal masks disagree on shape: {shapes}")
        return self._masks


@dataclass
class AggregatorParams:
    A: np.ndarray  # (q_dim, d_z)

    def to_dict(self):
        return {"A": self.A}

    @classmethod
    def from_dict(cls, d):
        return cls(A=d["A"])


@dataclass
class QfssPrediction:
    soft: np.ndarray
    binary: np.ndarray
    weights: np.ndarray


def init_aggregator_params(q_dim: int, d_z: int) -> AggregatorParams:
    # zeros give uniform initial attention over proposals
    return AggregatorParams(A=np.zeros((q_dim, d_z)))


def _proposal_logits(x_q, proposals: ProposalSet, params: AggregatorParams) -> np.ndarray:
    x_q = np.asarray(x_q, dtype=np.float64)
    if x_q.size != params.A.shape[0]:
        raise DimMismatch(f"question dim {x_q.size} vs A rows {params.A.shape[0]}")
    if proposals.features.shape[1] != params.A.shape[1]:
        raise DimMismatch(
            f"proposal feature dim {proposals.features.shape[1]} vs A cols {params.A.shape[1]}"
        )
    return proposals.features @ (x_q @ params.A)


def score_proposals(x_q, proposals: ProposalSet, params: AggregatorParams) -> np.ndarray:
    """Softmax of the bilinear proposal scores, max-subtracted for stability."""
    logits = _proposal_logits(x_q, proposals, params)
    e = np.exp(logits - logits.max())
    return e / e.sum()


def predict_mask(x_q, proposals: ProposalSet, params: AggregatorParams,
                 tau: float = DEFAULT_TAU) -> QfssPrediction:
    """Threshold the convex combination of proposal masks."""
    s = score_proposals(x_q, proposals, params)
    soft = aggregate(proposals.masks(), s)
    return QfssPrediction(soft=soft, binary=threshold(soft, tau), weights=s)


def qfss_loss(soft, gt) -> float:
    """Mean squared error per pixel between soft mask and ground truth."""
    soft = np.asarray(soft, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if soft.shape != gt.shape:
        raise DimensionMismatch(f"mask shapes differ: {soft.shape} vs {gt.shape}")
    diff = soft - gt
    return float(np.mean(diff * diff))


@dataclass
class QfssExample:
    question_id: int
    x_q: np.ndarray
    proposals: ProposalSet
    gt: np.ndarray


def qfss_loss_and_grads(x_q, proposals: ProposalSet, gt, params: AggregatorParams):
    """Analytic gradient of the pixel MSE through softmax aggregation."""
    x_q = np.asarray(x_q, dtype=np.float64)
    logits = _proposal_logits(x_q, proposals, params)
    e = np.exp(logits - logits.max())
    s = e / e.sum()

    stacked = np.stack([m.reshape(-1) for m in proposals.masks()]).astype(np.float64)
    gt_flat = np.asarray(gt, dtype=np.float64).reshape(-1)
    n_pix = gt_flat.size
    soft = s @ stacked
    diff = soft - gt_flat
    loss = float(diff @ diff) / n_pix

    d_soft = 2.0 * diff / n_pix
    d_s = stacked @ d_soft
    d_logits = s * (d_s - float(s @ d_s))
    grads = {"A": np.outer(x_q, d_logits @ proposals.features)}
    return loss, grads


def train_aggregator(examples: list[QfssExample], config: TrainConfig, lr: float = 0.001,
                     params: AggregatorParams | None = None):
    """Adam-train the bilinear matrix; returns (params, mean loss per epoch)."""
    if not examples:
        raise MissingProposals("no training examples")
    if params is None:
        params = init_aggregator_params(examples[0].x_q.size, examples[0].proposals.features.shape[1])
    pdict = params.to_dict()
    state = AdamState(lr=lr)
    history = []
    for epoch in range(config.epochs):
        losses = []
        for batch in make_batches(len(examples), config, epoch=epoch):
            total = np.zeros_like(params.A)
            for idx in batch:
                ex = examples[idx]
                loss, grads = qfss_loss_and_grads(ex.x_q, ex.proposals, ex.gt, params)
                losses.append(loss)
                total += grads["A"]
            adam_step(pdict, {"A": total / len(batch)}, state)
        history.append(float(np.mean(losses)))
    return params, history


def mean_iou(predictions: dict[int, np.ndarray], ground_truths: dict[int, np.ndarray]) -> float:
    vals = [iou(predictions[qid], ground_truths[qid]) for qid in ground_truths]
    return float(np.mean(vals)) if vals else 0.0


def scan_tau(examples: list[QfssExample], params: AggregatorParams, taus=TAU_SCAN) -> float:
    """Pick the threshold maximizing mean IOU on validation examples."""
    best_tau, best = DEFAULT_TAU, -1.0
    for tau in taus:
        preds = {ex.question_id: predict_mask(ex.x_q, ex.proposals, params, tau).binary
                 for ex in examples}
        gts = {ex.question_id: ex.gt for ex in examples}
        score = mean_iou(preds, gts)
        if score > best:
            best, best_tau = score, float(tau)
    return best_tau


@dataclass
class OracleExample:
    """One candidate segmentation for one question, with inclusion label."""

    question_id: int
    candidate_id: object
    mask: np.ndarray
    x: np.ndarray  # candidate feature followed by question feature
    label: int = 0


def train_oracle(examples: list[OracleExample], config: TrainConfig, lr: float = 0.001,
                 hidden: int = 32, params: MlpParams | None = None):
    """Binary inclusion classifier over (candidate, question) feature pairs."""
    if not examples:
        raise MissingProposals("no oracle training examples")
    x_all = np.stack([e.x for e in examples]).astype(np.float64)
    y_all = np.array([e.label for e in examples], dtype=np.float64)
    if params is None:
        params = init_mlp_params(x_all.shape[1], hidden=hidden, seed=config.seed)
    pdict = params.to_dict()
    state = AdamState(lr=lr)
    history = []
    for epoch in range(config.epochs):
        losses = []
        for batch in make_batches(len(examples), config, epoch=epoch):
            loss, grads = mlp_loss_and_grads(x_all[batch], y_all[batch], params)
            losses.append(loss)
            adam_step(pdict, grads, state)
        history.append(float(np.mean(losses)))
    return params, history


def oracle_predict(examples_by_question: dict[int, list[OracleExample]],
                   params: MlpParams) -> dict[int, np.ndarray]:
    """Union of candidates scoring >= 0.5; top scorer when none qualifies."""
    out = {}
    for qid, cands in examples_by_question.items():
        if not cands:
            raise MissingProposals(f"question {qid} has no oracle candidates")
        scores = mlp_forward_batch(np.stack([c.x for c in cands]), params)
        chosen = [c.mask for c, s in zip(cands, scores) if s >= 0.5]
        if not chosen:
            chosen = [cands[int(np.argmax(scores))].mask]
        merged = chosen[0].copy()
        for m in chosen[1:]:
            merged |= m
        out[qid] = merged
    return out


def oracle_upper_bound(train_examples: list[OracleExample],
                       test_by_question: dict[int, list[OracleExample]],
                       config: TrainConfig, lr: float = 0.001, hidden: int = 32):
    """Train the inclusion classifier and predict each test question's mask."""
    params, history = train_oracle(train_examples, config, lr=lr, hidden=hidden)
    return oracle_predict(test_by_question, params), params, history


@dataclass
class IouRow:
    question_type: str
    count: int
    mean_selected: float | None
    mean_candidates: float | None
    mean_iou: float | None


def evaluate_iou(predictions: dict[int, np.ndarray], dataset) -> list[IouRow]:
    """Mean IOU per question type plus the overall row, Table-style.

    Evaluates every unflagged record in the dataset; each one must have a
    prediction.
    """
    seg_count_per_image: dict[int, int] = {}
    for seg in dataset.segments.values():
        seg_count_per_image[seg.image_id] = seg_count_per_image.get(seg.image_id, 0) + 1

    per_type: dict[str, list[tuple[float, int, int]]] = {t: [] for t in QUESTION_TYPES}
    for qid, rec in dataset.records.items():
        if rec.flag != "none":
            continue
        if qid not in predictions:
            raise MissingPrediction(f"no prediction for question {qid}")
        gt = ground_truth_mask(rec, dataset.segments, dataset.images[rec.image_id])
        value = iou(predictions[qid], gt)
        n_sel = len(rec.selected_segment_ids) + len(rec.boxes)
        per_type[classify_question(rec.question)].append(
            (value, n_sel, seg_count_per_image.get(rec.image_id, 0))
        )

    def row(name, triples):
        if not triples:
            return IouRow(name, 0, None, None, None)
        vals = np.asarray(triples, dtype=np.float64)
        return IouRow(name, len(triples), float(vals[:, 1].mean()),
                      float(vals[:, 2].mean()), float(vals[:, 0].mean()))

    all_triples = [t for rows in per_type.values() for t in rows]
    out = [row("All", all_triples)]
    out.extend(row(qtype, per_type[qtype]) for qtype in QUESTION_TYPES)
    return out


def iou_report_json(rows: list[IouRow]) -> list[dict]:
    return [
        {
            "type": r.question_type,
            "count": r.count,
            "mean_selected": r.mean_selected,
            "mean_candidates": r.mean_candidates,
            "mean_iou": r.mean_iou,
        }
        for r in rows
    ]
