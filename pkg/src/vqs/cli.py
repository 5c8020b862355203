"""Command-line entry points for every pipeline stage.

Exit codes: 0 success, 1 validation or data failure, 2 usage error.
Machine-readable results go to stdout as JSON; progress goes to stderr.
A key=value config file supplies defaults for any long flag (dashes become
underscores); flags given on the command line win. VQS_DATA_DIR is the
fallback for --data-dir.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import attention, qfss, vqa
from .dataset import (
    Split,
    drop_flagged,
    load_dataset,
    make_split,
    question_ids_for,
    restrict_to_images,
    compute_stats,
    validate,
)
from .errors import ParseError, VqsError
from .features import (
    WordVectorTable,
    assemble_vqa_input,
    embed_text,
    load_feature_store,
    write_feature_store,
)
from .masks import RleMask, rle_decode, rle_encode
from .optim import TrainConfig, load_checkpoint, save_checkpoint
from .vqa import ChoiceItem, N_CANDIDATES


def load_config(path) -> dict:
    """Parse a simple key=value configuration file."""
    cfg = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        if "=" not in s:
            raise ParseError(f"line {lineno}: expected key=value, got '{s}'", path=str(path), line=lineno)
        key, value = s.split("=", 1)
        cfg[key.strip()] = value.strip()
    return cfg


def _log(msg):
    print(msg, file=sys.stderr)


def _emit(obj):
    print(json.dumps(obj, indent=2))


class _Context:
    """Resolved options: command line over config file over defaults."""

    def __init__(self, args):
        self.args = args
        config_path = getattr(args, "config", None)
        self.cfg = load_config(config_path) if config_path else {}

    def opt(self, name, default=None, cast=str):
        value = getattr(self.args, name, None)
        if value is None:
            raw = self.cfg.get(name)
            value = cast(raw) if raw is not None else default
        return value

    @property
    def data_dir(self):
        d = self.opt("data_dir") or os.environ.get("VQS_DATA_DIR")
        if not d:
            raise VqsError("no data directory: pass --data-dir, set data_dir in config, or VQS_DATA_DIR")
        return Path(d)

    @property
    def seed(self):
        return self.opt("seed", default=0, cast=int)

    def dataset(self, keep_flagged=False):
        ds = load_dataset(self.data_dir)
        return ds if keep_flagged else drop_flagged(ds)

    def train_config(self, default_epochs=1):
        return TrainConfig(
            batch_size=self.opt("batch_size", default=16, cast=int),
            epochs=self.opt("epochs", default=default_epochs, cast=int),
            seed=self.seed,
            shuffle=True,
        )

    def question_vectors(self, ds) -> dict[int, np.ndarray]:
        """Embedded questions from a feature store or a word-vector table."""
        store_path = self.opt("question_features")
        if store_path:
            store = load_feature_store(store_path)
            return {qid: store.vector(qid).astype(np.float64)
                    for qid in ds.records if qid in store}
        wv_path = self.opt("word_vectors")
        if not wv_path:
            raise VqsError("need --question-features or --word-vectors")
        table = WordVectorTable.load(wv_path)
        return {qid: embed_text(rec.question, table) for qid, rec in ds.records.items()}

    def split_parts(self, ds):
        """(train_qids, val_qids, test_qids) from --split, or everything."""
        split_path = self.opt("split")
        if not split_path:
            qids = list(ds.records)
            return qids, qids, qids
        split = Split.from_json(json.loads(Path(split_path).read_text(encoding="utf-8")))
        return (
            question_ids_for(ds, split.train_image_ids),
            question_ids_for(ds, split.val_image_ids),
            question_ids_for(ds, split.test_image_ids),
        )


# ---------------------------------------------------------------- commands


def cmd_validate(ctx: _Context) -> int:
    ds = load_dataset(ctx.data_dir)
    violations = validate(ds)
    _emit({"violations": [
        {"kind": v.kind, "record_id": v.record_id, "rule": v.rule, "message": v.message}
        for v in violations
    ]})
    return 1 if violations else 0


def cmd_stats(ctx: _Context) -> int:
    _emit(compute_stats(ctx.dataset()).to_json())
    return 0


def cmd_split(ctx: _Context) -> int:
    ds = ctx.dataset()
    if ctx.args.train_ids:
        def read_ids(path):
            text = Path(path).read_text(encoding="utf-8").strip()
            if text.startswith("["):
                return [int(x) for x in json.loads(text)]
            return [int(line) for line in text.splitlines() if line.strip()]

        split = make_split(ds, explicit=Split(
            read_ids(ctx.args.train_ids), read_ids(ctx.args.val_ids), read_ids(ctx.args.test_ids)))
    else:
        sizes = (ctx.args.train, ctx.args.val, ctx.args.test)
        if any(s is None for s in sizes):
            raise VqsError("split needs --train/--val/--test sizes or explicit id list files")
        split = make_split(ds, seed=ctx.seed, sizes=sizes)
    payload = split.to_json()
    payload["question_counts"] = {
        "train": len(question_ids_for(ds, split.train_image_ids)),
        "val": len(question_ids_for(ds, split.val_image_ids)),
        "test": len(question_ids_for(ds, split.test_image_ids)),
    }
    out = ctx.opt("out")
    if out:
        Path(out).write_text(json.dumps(split.to_json()), encoding="utf-8")
    _emit(payload)
    return 0


def cmd_targets(ctx: _Context) -> int:
    ds = ctx.dataset()
    g = ctx.opt("grid", default=attention.DEFAULT_GRID, cast=int)
    ids, rows = [], []
    for qid, rec in ds.records.items():
        target = attention.attention_target(rec, ds.segments, ds.images[rec.image_id], g)
        ids.append(qid)
        rows.append(target.reshape(-1))
    write_feature_store(ctx.args.out, np.asarray(ids, dtype=np.uint64),
                        np.asarray(rows, dtype=np.float32))
    _log(f"wrote {len(ids)} targets at grid {g}x{g} to {ctx.args.out}")
    _emit({"questions": len(ids), "grid": g, "out": ctx.args.out})
    return 0


def cmd_train_attn(ctx: _Context) -> int:
    ds = ctx.dataset()
    g = ctx.opt("grid", default=attention.DEFAULT_GRID, cast=int)
    target_store = load_feature_store(ctx.args.targets)
    targets = {qid: target_store.vector(qid).astype(np.float64)
               for qid in ds.records if qid in target_store}
    region_store = load_feature_store(ctx.args.region_features)
    qvecs = ctx.question_vectors(ds)
    examples = attention.build_attention_examples(ds, targets, region_store, qvecs, g)
    config = ctx.train_config(default_epochs=15)
    params, history = attention.train_attention(
        examples, config,
        lr=ctx.opt("lr", default=0.001, cast=float),
        hidden=ctx.opt("hidden", default=attention.DEFAULT_HIDDEN, cast=int),
    )
    for epoch, loss in enumerate(history):
        _log(f"epoch {epoch}: mean loss {loss:.6f}")
    save_checkpoint(ctx.args.out, params.to_dict())
    result = {"examples": len(examples), "epochs": config.epochs,
              "final_loss": history[-1] if history else None, "out": ctx.args.out}
    if ctx.opt("emit_features"):
        ids, rows = [], []
        for ex in examples:
            out = attention.attention_forward(ex.q, ex.regions, params)
            ids.append(ex.question_id)
            rows.append(out.x_att)
        write_feature_store(ctx.opt("emit_features"), np.asarray(ids, dtype=np.uint64),
                            np.asarray(rows, dtype=np.float32))
        result["features_out"] = ctx.opt("emit_features")
    _emit(result)
    return 0


def _choice_items(ds, qids, image_store, table, att_store=None):
    """ChoiceItems for every question with a full candidate set."""
    items = []
    truth = {}
    answers = {}
    for qid in qids:
        rec = ds.records[qid]
        if rec.candidates is None or len(rec.candidates) != N_CANDIDATES:
            continue
        if rec.image_id not in image_store:
            continue
        if att_store is not None and qid not in att_store:
            continue
        x_i = image_store.vector(rec.image_id).astype(np.float64)
        x_q = embed_text(rec.question, table)
        x_att = att_store.vector(qid).astype(np.float64) if att_store is not None else None
        label_idx = rec.candidates.index(rec.answer)
        truth[qid] = label_idx
        answers[qid] = rec.answer
        for idx, cand in enumerate(rec.candidates):
            x = assemble_vqa_input(x_i, x_q, embed_text(cand, table), x_att=x_att)
            items.append(ChoiceItem(question_id=qid, candidate_index=idx, x=x,
                                    label=int(idx == label_idx)))
    return items, truth, answers


def _vqa_inputs(ctx: _Context, ds):
    image_store = load_feature_store(ctx.args.image_features)
    table = WordVectorTable.load(ctx.opt("word_vectors"))
    att_store = load_feature_store(ctx.opt("attention_features")) if ctx.opt("attention_features") else None
    return image_store, table, att_store


def cmd_train_vqa(ctx: _Context) -> int:
    ds = ctx.dataset()
    image_store, table, att_store = _vqa_inputs(ctx, ds)
    train_q, _, _ = ctx.split_parts(ds)
    items, _, _ = _choice_items(ds, train_q, image_store, table, att_store)
    if not items:
        raise VqsError("no trainable questions (need candidates plus features)")
    config = ctx.train_config(default_epochs=15)
    params, history = vqa.train_mlp(
        items, config,
        lr=ctx.opt("lr", default=0.001, cast=float),
        hidden=ctx.opt("hidden", default=vqa.DEFAULT_HIDDEN, cast=int),
    )
    for epoch, loss in enumerate(history):
        _log(f"epoch {epoch}: mean loss {loss:.6f}")
    save_checkpoint(ctx.args.out, params.to_dict())
    _emit({"questions": len(items) // N_CANDIDATES, "epochs": config.epochs,
           "final_loss": history[-1] if history else None, "out": ctx.args.out,
           "attention_features": bool(att_store)})
    return 0


def cmd_eval_vqa(ctx: _Context) -> int:
    ds = ctx.dataset()
    image_store, table, att_store = _vqa_inputs(ctx, ds)
    parts = dict(zip(("train", "val", "test"), ctx.split_parts(ds)))
    qids = parts[ctx.opt("part", default="test")]
    items, truth, answers = _choice_items(ds, qids, image_store, table, att_store)
    if not truth:
        raise VqsError("no evaluable questions in the selected part")
    pdict, _ = load_checkpoint(ctx.args.model)
    params = vqa.MlpParams.from_dict(pdict)
    groups = vqa.group_choice_items(items)
    score_rows = {}
    preds = {}
    for qid, group in groups.items():
        x = np.stack([item.x for item in group])
        scores = vqa.mlp_forward_batch(x, params)
        score_rows[qid] = scores
        preds[qid] = int(np.argmax(scores))
    report = vqa.accuracy_by_bucket(preds, truth, answers)
    if ctx.opt("emit_scores"):
        # decision values for every scorable question, so the same file
        # serves ensemble tuning (val) and reporting (test)
        all_items, _, _ = _choice_items(ds, list(ds.records), image_store, table, att_store)
        all_rows = {}
        for qid, group in vqa.group_choice_items(all_items).items():
            all_rows[qid] = vqa.mlp_forward_batch(np.stack([i.x for i in group]), params)
        ids = sorted(all_rows)
        write_feature_store(ctx.opt("emit_scores"), np.asarray(ids, dtype=np.uint64),
                            np.asarray([all_rows[q] for q in ids], dtype=np.float32))
        report["scores_out"] = ctx.opt("emit_scores")
    _emit(report)
    return 0


def cmd_ensemble(ctx: _Context) -> int:
    ds = ctx.dataset()
    _, val_q, test_q = ctx.split_parts(ds)
    stores = [load_feature_store(p) for p in ctx.args.scores]
    truth = {}
    for qid, rec in ds.records.items():
        if rec.candidates is not None and rec.answer in rec.candidates:
            truth[qid] = rec.candidates.index(rec.answer)

    def score_matrix(qids):
        usable = [q for q in qids if q in truth and all(q in s for s in stores)]
        if not usable:
            return [], np.empty(0, dtype=int), []
        labels = np.asarray([truth[q] for q in usable])
        mats = [np.stack([s.vector(q).astype(np.float64) for q in usable]) for s in stores]
        return usable, labels, mats

    val_ids, val_labels, val_mats = score_matrix(val_q)
    if not val_ids:
        raise VqsError("no validation questions with scores from every model")
    weights = vqa.tune_ensemble(val_mats, val_labels)
    out = {"weights": weights.weights.tolist(),
           "val_accuracy": vqa.scores_accuracy(vqa.apply_ensemble(val_mats, weights), val_labels),
           "val_single_accuracy": [vqa.scores_accuracy(m, val_labels) for m in val_mats]}
    test_ids, test_labels, test_mats = score_matrix(test_q)
    if test_ids:
        out["test_accuracy"] = vqa.scores_accuracy(vqa.apply_ensemble(test_mats, weights), test_labels)
        out["test_single_accuracy"] = [vqa.scores_accuracy(m, test_labels) for m in test_mats]
    _emit(out)
    return 0


def _load_proposal_sets(ctx: _Context, ds):
    """ProposalSets per image from a segments-style JSON plus a feature store."""
    rows = json.loads(Path(ctx.args.proposals).read_text(encoding="utf-8"))
    store = load_feature_store(ctx.args.proposal_features)
    n_max = ctx.opt("n_proposals", default=qfss.DEFAULT_N_PROPOSALS, cast=int)
    by_image: dict[int, list[dict]] = {}
    for row in rows:
        by_image.setdefault(int(row["image_id"]), []).append(row)
    sets = {}
    for image_id, group in by_image.items():
        group = sorted(group, key=lambda r: int(r["proposal_id"]))[:n_max]
        usable = [r for r in group if int(r["proposal_id"]) in store]
        if not usable:
            continue
        sets[image_id] = qfss.ProposalSet(
            image_id=image_id,
            proposals=[RleMask.from_json(r["encoding"]) for r in usable],
            features=np.stack([store.vector(int(r["proposal_id"])).astype(np.float64)
                               for r in usable]),
        )
    return sets


def _qfss_examples(ds, qids, proposal_sets, qvecs):
    from .dataset import ground_truth_mask

    examples = []
    for qid in qids:
        rec = ds.records[qid]
        ps = proposal_sets.get(rec.image_id)
        if ps is None or qid not in qvecs:
            continue
        gt = ground_truth_mask(rec, ds.segments, ds.images[rec.image_id])
        examples.append(qfss.QfssExample(question_id=qid, x_q=qvecs[qid], proposals=ps, gt=gt))
    return examples


def cmd_train_qfss(ctx: _Context) -> int:
    ds = ctx.dataset()
    proposal_sets = _load_proposal_sets(ctx, ds)
    qvecs = ctx.question_vectors(ds)
    train_q, _, _ = ctx.split_parts(ds)
    examples = _qfss_examples(ds, train_q, proposal_sets, qvecs)
    config = ctx.train_config(default_epochs=15)
    params, history = qfss.train_aggregator(
        examples, config, lr=ctx.opt("lr", default=0.001, cast=float))
    for epoch, loss in enumerate(history):
        _log(f"epoch {epoch}: mean loss {loss:.6f}")
    save_checkpoint(ctx.args.out, params.to_dict())
    _emit({"examples": len(examples), "epochs": config.epochs,
           "final_loss": history[-1] if history else None, "out": ctx.args.out})
    return 0


def cmd_eval_qfss(ctx: _Context) -> int:
    ds = ctx.dataset()
    proposal_sets = _load_proposal_sets(ctx, ds)
    qvecs = ctx.question_vectors(ds)
    _, val_q, test_q = ctx.split_parts(ds)
    pdict, _ = load_checkpoint(ctx.args.model)
    params = qfss.AggregatorParams.from_dict(pdict)
    tau = ctx.opt("tau", cast=float)
    if tau is None:
        val_examples = _qfss_examples(ds, val_q, proposal_sets, qvecs)
        tau = qfss.scan_tau(val_examples, params) if val_examples else qfss.DEFAULT_TAU
        _log(f"selected tau {tau:.2f} on validation")
    test_examples = _qfss_examples(ds, test_q, proposal_sets, qvecs)
    if not test_examples:
        raise VqsError("no evaluable questions (missing proposals or question vectors)")
    predictions = {ex.question_id: qfss.predict_mask(ex.x_q, ex.proposals, params, tau).binary
                   for ex in test_examples}
    if ctx.opt("out"):
        payload = {str(qid): rle_encode(mask).to_json() for qid, mask in predictions.items()}
        Path(ctx.opt("out")).write_text(json.dumps(payload), encoding="utf-8")
    eval_ds = restrict_to_images(ds, {ex.proposals.image_id for ex in test_examples})
    eval_ds.records = {ex.question_id: ds.records[ex.question_id] for ex in test_examples}
    rows = qfss.evaluate_iou(predictions, eval_ds)
    _emit({"tau": tau, "report": qfss.iou_report_json(rows)})
    return 0


def cmd_oracle_qfss(ctx: _Context) -> int:
    from .dataset import ground_truth_mask
    from .masks import box_to_mask

    ds = ctx.dataset()
    seg_store = load_feature_store(ctx.args.segment_features)
    box_store = load_feature_store(ctx.opt("box_features")) if ctx.opt("box_features") else None
    qvecs = ctx.question_vectors(ds)
    train_q, _, test_q = ctx.split_parts(ds)

    def candidates_for(qid):
        rec = ds.records[qid]
        img = ds.images[rec.image_id]
        out = []
        for seg in ds.segments_of_image(rec.image_id):
            if seg.segment_id not in seg_store or qid not in qvecs:
                continue
            from .dataset import decode_segment
            x = np.concatenate((seg_store.vector(seg.segment_id).astype(np.float64), qvecs[qid]))
            out.append(qfss.OracleExample(
                question_id=qid, candidate_id=seg.segment_id, mask=decode_segment(seg, img),
                x=x, label=int(seg.segment_id in rec.selected_segment_ids)))
        if box_store is not None:
            for k, box in enumerate(rec.boxes):
                box_id = qid * 1000 + k
                if box_id not in box_store:
                    continue
                x = np.concatenate((box_store.vector(box_id).astype(np.float64), qvecs[qid]))
                out.append(qfss.OracleExample(
                    question_id=qid, candidate_id=f"box:{box_id}",
                    mask=box_to_mask(box, img.height, img.width), x=x, label=1))
        return out

    train_examples = [c for qid in train_q for c in candidates_for(qid)]
    test_by_question = {qid: candidates_for(qid) for qid in test_q}
    test_by_question = {qid: cands for qid, cands in test_by_question.items() if cands}
    if not train_examples or not test_by_question:
        raise VqsError("oracle needs segment features and question vectors on both parts")
    config = ctx.train_config(default_epochs=15)
    predictions, params, history = qfss.oracle_upper_bound(
        train_examples, test_by_question, config,
        lr=ctx.opt("lr", default=0.001, cast=float),
        hidden=ctx.opt("hidden", default=32, cast=int),
    )
    for epoch, loss in enumerate(history):
        _log(f"epoch {epoch}: mean loss {loss:.6f}")
    if ctx.opt("out"):
        payload = {str(qid): rle_encode(mask).to_json() for qid, mask in predictions.items()}
        Path(ctx.opt("out")).write_text(json.dumps(payload), encoding="utf-8")
    eval_ds = restrict_to_images(ds, {ds.records[qid].image_id for qid in test_by_question})
    eval_ds.records = {qid: ds.records[qid] for qid in test_by_question}
    rows = qfss.evaluate_iou(predictions, eval_ds)
    _emit({"report": qfss.iou_report_json(rows)})
    return 0


def cmd_serve(ctx: _Context) -> int:
    from .service import serve

    serve(
        ctx.data_dir,
        host=ctx.opt("host", default="127.0.0.1"),
        port=ctx.opt("port", default=8750, cast=int),
        log_path=ctx.opt("log"),
        images_dir=ctx.opt("images_dir", default=ctx.data_dir / "images"),
        ui_dir=ctx.opt("ui_dir"),
    )
    return 0


# ----------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    # global flags accepted both before and after the subcommand; SUPPRESS
    # keeps an unset subparser copy from clobbering the main parser's value
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="key=value configuration file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="seed for anything randomized")
    common.add_argument("--data-dir", dest="data_dir", default=argparse.SUPPRESS,
                        help="dataset directory (or VQS_DATA_DIR)")

    parser = argparse.ArgumentParser(
        prog="vqs",
        parents=[common],
        description="Link segmentations to question-answer pairs: dataset tools, "
                    "attention supervision, multiple-choice VQA, and mask aggregation.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    class _Sub:
        def add_parser(self, name, **kwargs):
            return subparsers.add_parser(name, parents=[common], **kwargs)

    sub = _Sub()
    sub.add_parser("validate", help="check every dataset invariant")
    sub.add_parser("stats", help="dataset statistics as JSON")

    p = sub.add_parser("split", help="image-id split, seeded or from explicit lists")
    p.add_argument("--train", type=int)
    p.add_argument("--val", type=int)
    p.add_argument("--test", type=int)
    p.add_argument("--train-ids", dest="train_ids")
    p.add_argument("--val-ids", dest="val_ids")
    p.add_argument("--test-ids", dest="test_ids")
    p.add_argument("--out")

    p = sub.add_parser("targets", help="write per-question attention targets")
    p.add_argument("--grid", type=int)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train-attn", help="train the region attention network")
    p.add_argument("--targets", required=True)
    p.add_argument("--region-features", dest="region_features", required=True)
    p.add_argument("--word-vectors", dest="word_vectors")
    p.add_argument("--question-features", dest="question_features")
    p.add_argument("--grid", type=int)
    p.add_argument("--hidden", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--emit-features", dest="emit_features")
    p.add_argument("--out", required=True)

    for name in ("train-vqa", "eval-vqa"):
        p = sub.add_parser(name, help="multiple-choice classifier " +
                           ("training" if name == "train-vqa" else "evaluation"))
        p.add_argument("--image-features", "--features", dest="image_features", required=True)
        p.add_argument("--word-vectors", dest="word_vectors", required=True)
        p.add_argument("--attention-features", dest="attention_features")
        p.add_argument("--split")
        if name == "train-vqa":
            p.add_argument("--hidden", type=int)
            p.add_argument("--epochs", type=int)
            p.add_argument("--batch-size", dest="batch_size", type=int)
            p.add_argument("--lr", type=float)
            p.add_argument("--out", required=True)
        else:
            p.add_argument("--model", required=True)
            p.add_argument("--part", choices=("train", "val", "test"))
            p.add_argument("--emit-scores", dest="emit_scores")

    p = sub.add_parser("ensemble", help="tune a convex combination of models' scores")
    p.add_argument("--scores", nargs="+", required=True)
    p.add_argument("--split")

    p = sub.add_parser("train-qfss", help="train the proposal aggregator")
    p.add_argument("--proposals", required=True)
    p.add_argument("--proposal-features", dest="proposal_features", required=True)
    p.add_argument("--word-vectors", dest="word_vectors")
    p.add_argument("--question-features", dest="question_features")
    p.add_argument("--n-proposals", dest="n_proposals", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--split")
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval-qfss", help="predict and score aggregated masks")
    p.add_argument("--model", required=True)
    p.add_argument("--proposals", required=True)
    p.add_argument("--proposal-features", dest="proposal_features", required=True)
    p.add_argument("--word-vectors", dest="word_vectors")
    p.add_argument("--question-features", dest="question_features")
    p.add_argument("--n-proposals", dest="n_proposals", type=int)
    p.add_argument("--tau", type=float)
    p.add_argument("--split")
    p.add_argument("--out")

    p = sub.add_parser("oracle-qfss", help="upper bound with true segments at test time")
    p.add_argument("--segment-features", dest="segment_features", required=True)
    p.add_argument("--box-features", dest="box_features")
    p.add_argument("--word-vectors", dest="word_vectors")
    p.add_argument("--question-features", dest="question_features")
    p.add_argument("--hidden", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--split")
    p.add_argument("--out")

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--log", help="submission log path")
    p.add_argument("--images-dir", dest="images_dir")
    p.add_argument("--ui-dir", dest="ui_dir")
    return parser


_COMMANDS = {
    "validate": cmd_validate,
    "stats": cmd_stats,
    "split": cmd_split,
    "targets": cmd_targets,
    "train-attn": cmd_train_attn,
    "train-vqa": cmd_train_vqa,
    "eval-vqa": cmd_eval_vqa,
    "ensemble": cmd_ensemble,
    "train-qfss": cmd_train_qfss,
    "eval-qfss": cmd_eval_qfss,
    "oracle-qfss": cmd_oracle_qfss,
    "serve": cmd_serve,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return _COMMANDS[args.command](_Context(args))
    except VqsError as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
