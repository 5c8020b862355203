"""HTTP annotation service backing the browser client.

Endpoints (JSON request/response, UTF-8):

  GET  /api/assignment?annotator=ID   create or resume an assignment
  GET  /api/task/{question_id}        image URL, segment overlays, QA text
  POST /api/annotation                submit one AnnotationSubmission
  GET  /api/export                    links.json built from all submissions
  GET  /static/*                      images and UI assets

Source dataset files are never mutated: submissions append to a
line-delimited log (single writer), compacted to the links.json schema on
export with last-write-wins per (question_id, annotator_id).
"""

from __future__ import annotations

import json
import threading
import time
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .dataset import (
    Dataset,
    VqsRecord,
    check_count_answer,
    decode_segment,
    load_dataset,
    validate_record,
)
from .errors import DimensionMismatch
from .masks import Box, Polygon, RleMask, rle_encode

ASSIGNMENT_SIZE = 100


class SubmissionLog:
    """Append-only, line-delimited JSON records; single-writer appends."""

    def __init__(self, path):
        self.path = Path(path)
        self.lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if not self.path.exists():
            self.path.touch()

    def append(self, record: dict):
        line = json.dumps(record, separators=(",", ":"))
        with self.lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()

    def entries(self) -> list[dict]:
        with self.lock:
            text = self.path.read_text(encoding="utf-8")
        out = []
        for line in text.splitlines():
            if line.strip():
                out.append(json.loads(line))
        return out

    def compact(self) -> list[dict]:
        """links.json rows, last write wins per (question_id, annotator_id)."""
        latest: dict[tuple, dict] = {}
        for entry in self.entries():
            latest[(entry["question_id"], entry["annotator_id"])] = entry
        return [
            {
                "question_id": e["question_id"],
                "selected_segment_ids": e["selected_segment_ids"],
                "boxes": e["boxes"],
                "flag": e["flag"],
                "annotator_id": e["annotator_id"],
            }
            for e in latest.values()
        ]


class AssignmentBook:
    """Blocks of up to 100 images handed to annotators, resumable by id."""

    def __init__(self, path, image_ids: list[int]):
        self.path = Path(path)
        self.lock = threading.Lock()
        self.image_ids = sorted(image_ids)
        self.by_annotator: dict[str, list[int]] = {}
        self.assigned: set[int] = set()
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    row = json.loads(line)
                    self.by_annotator[row["annotator_id"]] = row["image_ids"]
                    self.assigned.update(row["image_ids"])

    def get_or_create(self, annotator_id: str) -> list[int]:
        with self.lock:
            if annotator_id in self.by_annotator:
                return self.by_annotator[annotator_id]
            block = [i for i in self.image_ids if i not in self.assigned][:ASSIGNMENT_SIZE]
            self.by_annotator[annotator_id] = block
            self.assigned.update(block)
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({"annotator_id": annotator_id, "image_ids": block}) + "\n")
            return block


def _error(status: int, rule: str, detail: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": rule, "detail": detail})


def _parse_submission(body: dict, dataset: Dataset):
    """Build a VqsRecord from a submission body; returns (record, error)."""
    if not isinstance(body, dict):
        return None, _error(400, "bad_request", "body must be a JSON object")
    try:
        qid = int(body["question_id"])
    except (KeyError, TypeError, ValueError):
        return None, _error(400, "bad_request", "question_id is required")
    question = dataset.questions.get(qid)
    if question is None:
        return None, _error(404, "unknown_id", f"question {qid} does not exist")
    annotator = str(body.get("annotator_id", "")).strip()
    if not annotator:
        return None, _error(400, "bad_request", "annotator_id is required")
    boxes = []
    for b in body.get("boxes", []):
        try:
            boxes.append(Box(x=int(b["x"]), y=int(b["y"]), w=int(b["w"]), h=int(b["h"])))
        except (KeyError, TypeError, ValueError):
            return None, _error(400, "bad_request", f"malformed box {b}")
        except DimensionMismatch as exc:
            return None, _error(400, exc.rule, str(exc))
    try:
        selected = [int(s) for s in body.get("selected_segment_ids", [])]
    except (TypeError, ValueError):
        return None, _error(400, "bad_request", "selected_segment_ids must be integers")
    record = VqsRecord(
        question_id=qid,
        image_id=question["image_id"],
        question=question["question"],
        answer=question["answer"],
        candidates=question["candidates"],
        selected_segment_ids=selected,
        boxes=boxes,
        flag=str(body.get("flag", "none")),
        annotator_id=annotator,
    )
    violations = validate_record(record, dataset)
    if violations:
        v = violations[0]
        return None, _error(400, v.rule, v.message)
    return record, None


def create_app(data_dir, log_path=None, images_dir=None, ui_dir=None) -> FastAPI:
    data_dir = Path(data_dir)
    dataset = load_dataset(data_dir, allow_missing_links=True)
    log = SubmissionLog(log_path or data_dir / "submissions.log")
    book = AssignmentBook(log.path.with_suffix(".assignments"), list(dataset.images))

    questions_by_image: dict[int, list[int]] = {}
    for qid, q in sorted(dataset.questions.items()):
        questions_by_image.setdefault(q["image_id"], []).append(qid)

    app = FastAPI(title="segmentation-answer annotation service")
    app.state.dataset = dataset
    app.state.log = log

    @app.get("/api/assignment")
    def get_assignment(annotator: str = ""):
        annotator = annotator.strip()
        if not annotator:
            return _error(400, "bad_request", "annotator query parameter is required")
        images = book.get_or_create(annotator)
        task_ids = [qid for iid in images for qid in questions_by_image.get(iid, [])]
        done = {e["question_id"] for e in log.entries() if e["annotator_id"] == annotator}
        return {
            "annotator_id": annotator,
            "image_ids": images,
            "pending": [qid for qid in task_ids if qid not in done],
            "completed": [qid for qid in task_ids if qid in done],
        }

    @app.get("/api/task/{question_id}")
    def get_task(question_id: int):
        q = dataset.questions.get(question_id)
        if q is None:
            return _error(404, "unknown_id", f"question {question_id} does not exist")
        img = dataset.images[q["image_id"]]
        overlays = []
        for seg in dataset.segments.values():
            if seg.image_id != img.image_id:
                continue
            if isinstance(seg.encoding, RleMask):
                rle = seg.encoding
            elif isinstance(seg.encoding, Polygon):
                rle = rle_encode(decode_segment(seg, img))
            else:
                continue
            overlays.append(
                {
                    "segment_id": seg.segment_id,
                    "category": seg.category,
                    "display_color": seg.display_color,
                    "rle": rle.to_json(),
                }
            )
        overlays.sort(key=lambda o: o["segment_id"])
        return {
            "question_id": question_id,
            "question": q["question"],
            "answer": q["answer"],
            "image": {
                "image_id": img.image_id,
                "url": f"/static/images/{img.file_name}",
                "width": img.width,
                "height": img.height,
            },
            "segments": overlays,
        }

    @app.post("/api/annotation")
    async def post_annotation(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "bad_request", "body is not valid JSON")
        record, err = _parse_submission(body, dataset)
        if err is not None:
            return err
        warning = None
        if check_count_answer(record) == "mismatch":
            warning = "count_mismatch"
        log.append(
            {
                "question_id": record.question_id,
                "selected_segment_ids": record.selected_segment_ids,
                "boxes": [b.to_json() for b in record.boxes],
                "flag": record.flag,
                "annotator_id": record.annotator_id,
                "timestamp": body.get("timestamp", time.time()),
            }
        )
        return {"status": "accepted", "warning": warning}

    @app.get("/api/export")
    def export():
        return log.compact()

    if images_dir and Path(images_dir).is_dir():
        app.mount("/static/images", StaticFiles(directory=images_dir), name="images")
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/static", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app


def serve(data_dir, host="127.0.0.1", port=8750, log_path=None, images_dir=None, ui_dir=None):
    """Run the annotation service until interrupted."""
    import uvicorn

    app = create_app(data_dir, log_path=log_path, images_dir=images_dir, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
