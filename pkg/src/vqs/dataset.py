"""Dataset model: records linking questions to segmentation answers.

A dataset lives in four UTF-8 JSON files inside one directory:

  images.json     [{image_id, file_name, width, height}]
  segments.json   [{segment_id, image_id, encoding, category, display_color}]
  questions.json  [{question_id, image_id, question, answer, candidates?}]
  links.json      [{question_id, selected_segment_ids, boxes, flag, annotator_id}]

`encoding` is either an RLE object {"size": [h, w], "counts": [...]} or a
polygon {"vertices": [[x, y], ...]}. A question joined with its link forms
one VqsRecord; questions without links are kept but not counted as records.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import (
    DegeneratePolygon,
    DimensionMismatch,
    FlaggedRecord,
    ParseError,
    SizesExceedDataset,
)
from .masks import Box, Polygon, RleMask, box_to_mask, rasterize_polygon, rle_decode, union

FLAGS = ("none", "full_image", "ambiguous")

QUESTION_TYPES = (
    "does/do",
    "how many",
    "is/are",
    "what color",
    "what is",
    "what (other)",
    "where",
    "which",
    "who",
    "why",
    "others",
)

# Prefix -> type, scanned in precedence order; a prefix matches only at a
# word boundary so "whereabouts" does not classify as "where".
_PREFIX_RULES = (
    ("how many", "how many"),
    ("what color", "what color"),
    ("what is", "what is"),
    ("what", "what (other)"),
    ("is", "is/are"),
    ("are", "is/are"),
    ("does", "does/do"),
    ("do", "does/do"),
    ("where", "where"),
    ("which", "which"),
    ("who", "who"),
    ("why", "why"),
)

_NUMBER_WORDS = {
    "zero": 0, "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10,
}


@dataclass
class ImageMeta:
    image_id: int
    file_name: str
    width: int
    height: int


@dataclass
class SegmentRecord:
    segment_id: int
    image_id: int
    encoding: RleMask | Polygon | None
    category: str = ""
    display_color: int = 0


@dataclass
class VqsRecord:
    """One question-image link: text QA plus the selected visual answer."""

    question_id: int
    image_id: int
    question: str
    answer: str
    candidates: list[str] | None
    selected_segment_ids: list[int]
    boxes: list[Box]
    flag: str = "none"
    annotator_id: str = ""


@dataclass
class Violation:
    kind: str
    record_id: object
    rule: str
    message: str

    def __str__(self):
        return f"{self.kind} {self.record_id}: {self.rule} - {self.message}"


@dataclass
class TypeStats:
    count: int
    mean_selected: float
    mean_candidates: float


@dataclass
class DatasetStats:
    n_images: int
    n_questions: int
    n_segments_selected: int
    n_boxes: int
    per_count_histogram: dict[int, int]
    per_type: dict[str, TypeStats]

    def to_json(self) -> dict:
        return {
            "n_images": self.n_images,
            "n_questions": self.n_questions,
            "n_segments_selected": self.n_segments_selected,
            "n_boxes": self.n_boxes,
            "per_count_histogram": {str(k): v for k, v in sorted(self.per_count_histogram.items())},
            "per_type": {
                t: {"count": s.count, "mean_selected": s.mean_selected, "mean_candidates": s.mean_candidates}
                for t, s in self.per_type.items()
            },
        }


@dataclass
class Split:
    train_image_ids: list[int]
    val_image_ids: list[int]
    test_image_ids: list[int]

    def to_json(self) -> dict:
        return {
            "train_image_ids": self.train_image_ids,
            "val_image_ids": self.val_image_ids,
            "test_image_ids": self.test_image_ids,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Split":
        return cls(
            train_image_ids=[int(i) for i in obj["train_image_ids"]],
            val_image_ids=[int(i) for i in obj["val_image_ids"]],
            test_image_ids=[int(i) for i in obj["test_image_ids"]],
        )


@dataclass
class Dataset:
    images: dict[int, ImageMeta] = field(default_factory=dict)
    segments: dict[int, SegmentRecord] = field(default_factory=dict)
    # question metadata for every question, linked or not
    questions: dict[int, dict] = field(default_factory=dict)
    # annotated records, keyed by question id
    records: dict[int, VqsRecord] = field(default_factory=dict)
    # violations discovered while parsing (reported by validate)
    parse_violations: list[Violation] = field(default_factory=list)

    def segments_of_image(self, image_id: int) -> list[SegmentRecord]:
        return [s for s in self.segments.values() if s.image_id == image_id]

    def records_of_image(self, image_id: int) -> list[VqsRecord]:
        return [r for r in self.records.values() if r.image_id == image_id]


def _load_json(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}", path=str(path)) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", path=str(path), line=exc.lineno) from exc


def _require(obj: dict, key: str, path: Path):
    if key not in obj:
        raise ParseError(f"{path}: missing field '{key}' in {obj}", path=str(path))
    return obj[key]


def _decode_encoding(obj: dict, path: Path):
    if "counts" in obj:
        return RleMask.from_json(obj)
    if "vertices" in obj:
        return Polygon.from_json(obj)
    raise ParseError(f"{path}: encoding must carry 'counts' or 'vertices'", path=str(path))


def load_dataset(data_dir, allow_missing_links: bool = False) -> Dataset:
    """Load and join the four dataset files; raises ParseError on bad input.

    The annotation service loads with allow_missing_links=True since the
    links are exactly what it exists to collect.
    """
    data_dir = Path(data_dir)
    ds = Dataset()

    for row in _load_json(data_dir / "images.json"):
        meta = ImageMeta(
            image_id=int(_require(row, "image_id", data_dir / "images.json")),
            file_name=str(_require(row, "file_name", data_dir / "images.json")),
            width=int(_require(row, "width", data_dir / "images.json")),
            height=int(_require(row, "height", data_dir / "images.json")),
        )
        if meta.image_id in ds.images:
            ds.parse_violations.append(
                Violation("image", meta.image_id, "image_id_duplicate", "image id appears twice")
            )
        ds.images[meta.image_id] = meta

    seg_path = data_dir / "segments.json"
    for row in _load_json(seg_path):
        seg_id = int(_require(row, "segment_id", seg_path))
        encoding = None
        try:
            encoding = _decode_encoding(_require(row, "encoding", seg_path), seg_path)
        except (DegeneratePolygon, DimensionMismatch) as exc:
            ds.parse_violations.append(Violation("segment", seg_id, exc.rule, str(exc)))
        seg = SegmentRecord(
            segment_id=seg_id,
            image_id=int(_require(row, "image_id", seg_path)),
            encoding=encoding,
            category=str(row.get("category", "")),
            display_color=int(row.get("display_color", 0)),
        )
        if seg.segment_id in ds.segments:
            ds.parse_violations.append(
                Violation("segment", seg.segment_id, "segment_id_duplicate", "segment id appears twice")
            )
        ds.segments[seg.segment_id] = seg

    q_path = data_dir / "questions.json"
    for row in _load_json(q_path):
        qid = int(_require(row, "question_id", q_path))
        if qid in ds.questions:
            ds.parse_violations.append(
                Violation("question", qid, "question_id_duplicate", "question id appears twice")
            )
        ds.questions[qid] = {
            "question_id": qid,
            "image_id": int(_require(row, "image_id", q_path)),
            "question": str(_require(row, "question", q_path)),
            "answer": str(_require(row, "answer", q_path)),
            "candidates": [str(c) for c in row["candidates"]] if row.get("candidates") is not None else None,
        }

    l_path = data_dir / "links.json"
    if allow_missing_links and not l_path.exists():
        return ds
    for row in _load_json(l_path):
        qid = int(_require(row, "question_id", l_path))
        q = ds.questions.get(qid)
        if q is None:
            ds.parse_violations.append(
                Violation("link", qid, "link_unknown_question", "link references a question that does not exist")
            )
            continue
        if qid in ds.records:
            ds.parse_violations.append(
                Violation("link", qid, "link_duplicate_question", "question has more than one link; keeping the last")
            )
        boxes = []
        for b in row.get("boxes", []):
            try:
                boxes.append(Box.from_json(b))
            except DimensionMismatch as exc:
                ds.parse_violations.append(Violation("link", qid, exc.rule, str(exc)))
        ds.records[qid] = VqsRecord(
            question_id=qid,
            image_id=q["image_id"],
            question=q["question"],
            answer=q["answer"],
            candidates=q["candidates"],
            selected_segment_ids=[int(s) for s in row.get("selected_segment_ids", [])],
            boxes=boxes,
            flag=str(row.get("flag", "none")),
            annotator_id=str(row.get("annotator_id", "")),
        )
    return ds


def save_links(records, path):
    """Write records back out in the links.json schema."""
    rows = [
        {
            "question_id": r.question_id,
            "selected_segment_ids": list(r.selected_segment_ids),
            "boxes": [b.to_json() for b in r.boxes],
            "flag": r.flag,
            "annotator_id": r.annotator_id,
        }
        for r in records
    ]
    Path(path).write_text(json.dumps(rows, indent=1), encoding="utf-8")
    return rows


def validate(dataset: Dataset) -> list[Violation]:
    """Check every type invariant; empty result means the dataset is sound."""
    out = list(dataset.parse_violations)

    for img in dataset.images.values():
        if img.width < 1 or img.height < 1:
            out.append(Violation("image", img.image_id, "image_dims_positive", f"{img.width}x{img.height}"))

    for seg in dataset.segments.values():
        img = dataset.images.get(seg.image_id)
        if img is None:
            out.append(
                Violation("segment", seg.segment_id, "segment_unknown_image", f"image {seg.image_id} not found")
            )
            continue
        if isinstance(seg.encoding, RleMask):
            if (seg.encoding.height, seg.encoding.width) != (img.height, img.width):
                out.append(
                    Violation(
                        "segment",
                        seg.segment_id,
                        "segment_dims_mismatch",
                        f"rle size {seg.encoding.height}x{seg.encoding.width} vs image {img.height}x{img.width}",
                    )
                )
            elif sum(seg.encoding.counts) != img.height * img.width:
                out.append(
                    Violation("segment", seg.segment_id, "rle_counts_invalid", "counts do not sum to height*width")
                )

    for q in dataset.questions.values():
        if q["image_id"] not in dataset.images:
            out.append(
                Violation("question", q["question_id"], "question_unknown_image", f"image {q['image_id']} not found")
            )
        cands = q["candidates"]
        if cands is not None:
            if len(cands) != 18:
                out.append(
                    Violation("question", q["question_id"], "candidates_length", f"{len(cands)} candidates, expected 18")
                )
            if q["answer"] not in cands:
                out.append(
                    Violation("question", q["question_id"], "candidates_missing_answer", "answer not among candidates")
                )

    for rec in dataset.records.values():
        out.extend(validate_record(rec, dataset))
    return out


def validate_record(rec: VqsRecord, dataset: Dataset) -> list[Violation]:
    """Invariant checks for one record; shared with the annotation service."""
    out = []
    if rec.flag not in FLAGS:
        out.append(Violation("link", rec.question_id, "flag_invalid", f"flag '{rec.flag}'"))
        return out
    if rec.flag == "none" and not rec.selected_segment_ids and not rec.boxes:
        out.append(
            Violation("link", rec.question_id, "flag_requires_selection", "unflagged record selects nothing")
        )
    for sid in rec.selected_segment_ids:
        seg = dataset.segments.get(sid)
        if seg is None:
            out.append(Violation("link", rec.question_id, "selection_unknown_segment", f"segment {sid} not found"))
        elif seg.image_id != rec.image_id:
            out.append(
                Violation(
                    "link", rec.question_id, "selection_wrong_image",
                    f"segment {sid} belongs to image {seg.image_id}, not {rec.image_id}",
                )
            )
    img = dataset.images.get(rec.image_id)
    if img is not None:
        for i, b in enumerate(rec.boxes):
            clamped_empty = b.x >= img.width or b.y >= img.height or b.x + b.w <= 0 or b.y + b.h <= 0
            if clamped_empty:
                out.append(
                    Violation("link", rec.question_id, "box_outside_image", f"box {i} clamps to nothing")
                )
    return out


def filter_min_segments(dataset: Dataset, k: int = 3) -> Dataset:
    """Keep only images with at least k instance segments, plus their rows."""
    per_image: dict[int, int] = {}
    for seg in dataset.segments.values():
        per_image[seg.image_id] = per_image.get(seg.image_id, 0) + 1
    keep = {iid for iid in dataset.images if per_image.get(iid, 0) >= k}
    return Dataset(
        images={i: m for i, m in dataset.images.items() if i in keep},
        segments={s: seg for s, seg in dataset.segments.items() if seg.image_id in keep},
        questions={q: row for q, row in dataset.questions.items() if row["image_id"] in keep},
        records={q: r for q, r in dataset.records.items() if r.image_id in keep},
        parse_violations=list(dataset.parse_violations),
    )


def drop_flagged(dataset: Dataset) -> Dataset:
    """Remove records flagged full_image or ambiguous."""
    return replace(
        dataset,
        records={q: r for q, r in dataset.records.items() if r.flag == "none"},
        parse_violations=list(dataset.parse_violations),
    )


def decode_segment(seg: SegmentRecord, image: ImageMeta) -> np.ndarray:
    """Materialize a segment's binary mask at image resolution."""
    if isinstance(seg.encoding, RleMask):
        return rle_decode(seg.encoding)
    if isinstance(seg.encoding, Polygon):
        return rasterize_polygon(seg.encoding, image.height, image.width)
    raise DimensionMismatch(f"segment {seg.segment_id} has no decodable encoding")


def ground_truth_mask(record: VqsRecord, segments: dict[int, SegmentRecord], image: ImageMeta) -> np.ndarray:
    """Union of the selected segments and any drawn boxes."""
    if record.flag != "none":
        raise FlaggedRecord(f"record {record.question_id} is flagged '{record.flag}'")
    parts = [decode_segment(segments[sid], image) for sid in record.selected_segment_ids]
    parts.extend(box_to_mask(b, image.height, image.width) for b in record.boxes)
    if not parts:
        return np.zeros((image.height, image.width), dtype=bool)
    return union(parts)


def classify_question(question: str) -> str:
    """Assign exactly one of the 11 question types by leading words."""
    s = question.strip().lower()
    for prefix, qtype in _PREFIX_RULES:
        if s.startswith(prefix) and (len(s) == len(prefix) or not s[len(prefix)].isalnum()):
            return qtype
    return "others"


def parse_number(text: str) -> int | None:
    """Parse digits or the English words zero through ten; None otherwise."""
    s = text.strip().lower()
    if s.isdigit():
        return int(s)
    return _NUMBER_WORDS.get(s)


def check_count_answer(record: VqsRecord, number_parser=parse_number) -> str:
    """Annotation-time aid: does the selection count match a how-many answer?

    Returns 'ok', 'mismatch', or 'not_applicable'. A single drawn box is
    accepted for any answer greater than three.
    """
    if classify_question(record.question) != "how many":
        return "not_applicable"
    n = number_parser(record.answer)
    if n is None:
        return "not_applicable"
    count = len(record.selected_segment_ids) + len(record.boxes)
    if count == n or (n > 3 and len(record.boxes) == 1):
        return "ok"
    return "mismatch"


def compute_stats(dataset: Dataset) -> DatasetStats:
    """Exact dataset counts plus the per-question-type breakdown.

    Selected counts follow the convention that a drawn box counts like a
    selected segment; candidate counts are the instance segments available
    in the record's image.
    """
    records = list(dataset.records.values())
    seg_count_per_image: dict[int, int] = {}
    for seg in dataset.segments.values():
        seg_count_per_image[seg.image_id] = seg_count_per_image.get(seg.image_id, 0) + 1

    histogram: dict[int, int] = {}
    per_type_rows: dict[str, list[VqsRecord]] = {t: [] for t in QUESTION_TYPES}
    for rec in records:
        n_sel = len(rec.selected_segment_ids) + len(rec.boxes)
        histogram[n_sel] = histogram.get(n_sel, 0) + 1
        per_type_rows[classify_question(rec.question)].append(rec)

    per_type = {}
    for qtype, rows in per_type_rows.items():
        if not rows:
            per_type[qtype] = TypeStats(0, 0.0, 0.0)
            continue
        sel = [len(r.selected_segment_ids) + len(r.boxes) for r in rows]
        cand = [seg_count_per_image.get(r.image_id, 0) for r in rows]
        per_type[qtype] = TypeStats(len(rows), float(np.mean(sel)), float(np.mean(cand)))

    return DatasetStats(
        n_images=len({r.image_id for r in records}),
        n_questions=len(records),
        n_segments_selected=sum(len(r.selected_segment_ids) for r in records),
        n_boxes=sum(len(r.boxes) for r in records),
        per_count_histogram=histogram,
        per_type=per_type,
    )


def make_split(
    dataset: Dataset,
    seed: int = 0,
    sizes: tuple[int, int, int] | None = None,
    explicit: Split | None = None,
) -> Split:
    """Split by image id so no test image leaks into training.

    With `explicit`, the published id lists are used verbatim (checked for
    disjointness); otherwise a seeded permutation is cut to `sizes`.
    """
    image_ids = sorted(dataset.images)
    if explicit is not None:
        parts = [set(explicit.train_image_ids), set(explicit.val_image_ids), set(explicit.test_image_ids)]
        if parts[0] & parts[1] or parts[0] & parts[2] or parts[1] & parts[2]:
            raise SizesExceedDataset("explicit split lists overlap")
        unknown = (parts[0] | parts[1] | parts[2]) - set(image_ids)
        if unknown:
            raise SizesExceedDataset(f"explicit split references unknown images: {sorted(unknown)[:5]}")
        return Split(
            sorted(explicit.train_image_ids),
            sorted(explicit.val_image_ids),
            sorted(explicit.test_image_ids),
        )
    if sizes is None:
        raise SizesExceedDataset("either sizes or explicit lists are required")
    n_train, n_val, n_test = sizes
    if n_train + n_val + n_test > len(image_ids):
        raise SizesExceedDataset(
            f"requested {n_train}+{n_val}+{n_test} images, dataset has {len(image_ids)}"
        )
    order = np.random.default_rng(seed).permutation(len(image_ids))
    shuffled = [image_ids[i] for i in order]
    return Split(
        train_image_ids=sorted(shuffled[:n_train]),
        val_image_ids=sorted(shuffled[n_train:n_train + n_val]),
        test_image_ids=sorted(shuffled[n_train + n_val:n_train + n_val + n_test]),
    )


def question_ids_for(dataset: Dataset, image_ids) -> list[int]:
    """Question ids whose image falls in the given id set, in record order."""
    wanted = set(image_ids)
    return [qid for qid, rec in dataset.records.items() if rec.image_id in wanted]


def restrict_to_images(dataset: Dataset, image_ids) -> Dataset:
    """Keep only the records (and question rows) of the given images."""
    wanted = set(image_ids)
    return replace(
        dataset,
        questions={q: row for q, row in dataset.questions.items() if row["image_id"] in wanted},
        records={q: r for q, r in dataset.records.items() if r.image_id in wanted},
        parse_violations=list(dataset.parse_violations),
    )
