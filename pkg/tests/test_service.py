import json
import threading

import pytest
from fastapi.testclient import TestClient

from vqs.dataset import load_dataset, validate
from vqs.service import create_app

from conftest import small_fixture_rows, write_dataset


@pytest.fixture
def client(fixture_dir, tmp_path):
    app = create_app(fixture_dir, log_path=tmp_path / "sub.log")
    with TestClient(app) as c:
        yield c


def submission(qid=100, segments=(10,), boxes=(), flag="none", annotator="a1"):
    return {
        "question_id": qid,
        "selected_segment_ids": list(segments),
        "boxes": list(boxes),
        "flag": flag,
        "annotator_id": annotator,
    }


class TestAnnotationFlow:
    def test_valid_submission_appears_once_in_export(self, client):
        r = client.post("/api/annotation", json=submission())
        assert r.status_code == 200
        assert r.json() == {"status": "accepted", "warning": None}
        export = client.get("/api/export").json()
        rows = [e for e in export if e["question_id"] == 100]
        assert len(rows) == 1
        assert rows[0]["selected_segment_ids"] == [10]

    def test_count_mismatch_warning(self, client):
        # question 101 is "How many animals are there?" with answer 2
        r = client.post("/api/annotation", json=submission(qid=101, segments=(10,)))
        assert r.status_code == 200
        assert r.json()["warning"] == "count_mismatch"

    def test_count_match_no_warning(self, client):
        r = client.post("/api/annotation", json=submission(qid=101, segments=(10, 11)))
        assert r.json()["warning"] is None

    def test_flagged_submission_needs_no_selection(self, client):
        r = client.post("/api/annotation", json=submission(qid=103, segments=(), flag="full_image"))
        assert r.status_code == 200

    def test_unflagged_empty_rejected(self, client):
        r = client.post("/api/annotation", json=submission(segments=()))
        assert r.status_code == 400
        assert r.json()["error"] == "flag_requires_selection"

    def test_unknown_question_404(self, client):
        r = client.post("/api/annotation", json=submission(qid=777777))
        assert r.status_code == 404
        assert r.json()["error"] == "unknown_id"

    def test_wrong_image_segment_rejected(self, client):
        r = client.post("/api/annotation", json=submission(qid=100, segments=(20,)))
        assert r.status_code == 400
        assert r.json()["error"] == "selection_wrong_image"

    def test_malformed_box_rejected(self, client):
        r = client.post("/api/annotation",
                        json=submission(segments=(), boxes=[{"x": 0, "y": 0, "w": 0, "h": 3}]))
        assert r.status_code == 400

    def test_invalid_flag_rejected(self, client):
        r = client.post("/api/annotation", json=submission(flag="maybe"))
        assert r.status_code == 400
        assert r.json()["error"] == "flag_invalid"

    def test_resubmission_last_write_wins(self, client):
        client.post("/api/annotation", json=submission(segments=(10,)))
        client.post("/api/annotation", json=submission(segments=(11,)))
        rows = [e for e in client.get("/api/export").json() if e["question_id"] == 100]
        assert len(rows) == 1
        assert rows[0]["selected_segment_ids"] == [11]

    def test_two_annotators_kept_separately(self, client):
        client.post("/api/annotation", json=submission(annotator="a1"))
        client.post("/api/annotation", json=submission(annotator="a2", segments=(11,)))
        rows = [e for e in client.get("/api/export").json() if e["question_id"] == 100]
        assert len(rows) == 2

    def test_export_passes_validate(self, client, fixture_dir, tmp_path):
        client.post("/api/annotation", json=submission(qid=100, segments=(10,)))
        client.post("/api/annotation", json=submission(qid=101, segments=(10, 11)))
        client.post("/api/annotation", json=submission(qid=104, segments=(), flag="ambiguous"))
        export = client.get("/api/export").json()
        images, segments, questions, _ = small_fixture_rows()
        d = write_dataset(tmp_path / "roundtrip", images, segments, questions, export)
        assert validate(load_dataset(d)) == []

    def test_source_files_never_mutated(self, client, fixture_dir):
        before = {p.name: p.read_bytes() for p in fixture_dir.iterdir()}
        client.post("/api/annotation", json=submission())
        client.get("/api/export")
        after = {p.name: p.read_bytes() for p in fixture_dir.iterdir()}
        assert before == after

    def test_concurrent_submissions_all_exported_once(self, client):
        # distinct (question, annotator) pairs from racing threads
        def worker(annotator):
            for qid in (100, 101, 102, 103, 104):
                ok_segments = {100: (10,), 101: (10, 11), 102: (21,), 103: (20,), 104: (30,)}
                r = client.post("/api/annotation",
                                json=submission(qid=qid, segments=ok_segments[qid],
                                                annotator=annotator))
                assert r.status_code == 200

        threads = [threading.Thread(target=worker, args=(f"t{i}",)) for i in range(6)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        export = client.get("/api/export").json()
        keys = [(e["question_id"], e["annotator_id"]) for e in export]
        assert len(keys) == len(set(keys)) == 30


class TestAssignment:
    def test_create_and_resume(self, client):
        a1 = client.get("/api/assignment", params={"annotator": "w1"}).json()
        assert a1["image_ids"] == [1, 2, 3]
        assert sorted(a1["pending"]) == [100, 101, 102, 103, 104, 105]
        assert a1["completed"] == []
        client.post("/api/annotation", json=submission(qid=100, annotator="w1"))
        a2 = client.get("/api/assignment", params={"annotator": "w1"}).json()
        assert a2["image_ids"] == a1["image_ids"]
        assert 100 in a2["completed"] and 100 not in a2["pending"]

    def test_assignment_capped_at_100(self, tmp_path):
        images = [{"image_id": i, "file_name": f"{i}.png", "width": 2, "height": 2}
                  for i in range(150)]
        d = write_dataset(tmp_path / "big", images, [], [], [])
        app = create_app(d, log_path=tmp_path / "log")
        with TestClient(app) as c:
            a = c.get("/api/assignment", params={"annotator": "w"}).json()
            assert len(a["image_ids"]) == 100
            b = c.get("/api/assignment", params={"annotator": "w2"}).json()
            assert len(b["image_ids"]) == 50
            assert not set(a["image_ids"]) & set(b["image_ids"])

    def test_missing_annotator_param(self, client):
        assert client.get("/api/assignment").status_code == 400


class TestTask:
    def test_payload_shape(self, client):
        task = client.get("/api/task/100").json()
        assert task["question"] == "What is next to the dog?"
        assert task["answer"] == "cat"
        assert task["image"]["url"].endswith("img1.png")
        assert [s["segment_id"] for s in task["segments"]] == [10, 11, 12]
        for seg in task["segments"]:
            assert seg["rle"]["size"] == [8, 8]
            assert isinstance(seg["display_color"], int)

    def test_polygon_segment_served_as_rle(self, client):
        task = client.get("/api/task/100").json()
        poly = next(s for s in task["segments"] if s["segment_id"] == 12)
        assert sum(poly["rle"]["counts"]) == 64

    def test_unknown_task_404(self, client):
        assert client.get("/api/task/31337").status_code == 404

    def test_log_survives_restart(self, fixture_dir, tmp_path):
        log = tmp_path / "sub.log"
        with TestClient(create_app(fixture_dir, log_path=log)) as c:
            c.post("/api/annotation", json=submission())
        with TestClient(create_app(fixture_dir, log_path=log)) as c:
            export = c.get("/api/export").json()
            assert len(export) == 1
