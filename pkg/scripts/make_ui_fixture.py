#!/usr/bin/env python3
"""Write the 3-task annotation fixture used by the browser-client tests:
one question answered by selecting two segments, one needing a drawn box,
and one to be flagged ambiguous (gray button).
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from vqs.masks import rle_encode

SIDE = 16


def block(r0, r1, c0, c1):
    m = np.zeros((SIDE, SIDE), dtype=bool)
    m[r0:r1, c0:c1] = True
    return m


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    args = parser.parse_args()
    out = Path(args.out)
    (out / "images").mkdir(parents=True, exist_ok=True)

    images = [{"image_id": 1, "file_name": "img001.png", "width": SIDE, "height": SIDE}]
    segments = [
        {"segment_id": 11, "image_id": 1, "encoding": rle_encode(block(0, 6, 0, 6)).to_json(),
         "category": "cat", "display_color": 0},
        {"segment_id": 12, "image_id": 1, "encoding": rle_encode(block(0, 6, 10, 16)).to_json(),
         "category": "dog", "display_color": 1},
        {"segment_id": 13, "image_id": 1, "encoding": rle_encode(block(10, 16, 0, 6)).to_json(),
         "category": "ball", "display_color": 2},
    ]
    questions = [
        {"question_id": 501, "image_id": 1, "question": "How many animals are there?", "answer": "2"},
        {"question_id": 502, "image_id": 1, "question": "What is in the corner?", "answer": "a sign"},
        {"question_id": 503, "image_id": 1, "question": "Is it a nice day?", "answer": "maybe"},
    ]

    for name, rows in [("images.json", images), ("segments.json", segments),
                       ("questions.json", questions)]:
        (out / name).write_text(json.dumps(rows, indent=1), encoding="utf-8")

    from PIL import Image

    canvas = np.full((SIDE, SIDE, 3), 235, dtype=np.uint8)
    canvas[0:6, 0:6] = (210, 80, 60)
    canvas[0:6, 10:16] = (70, 140, 210)
    canvas[10:16, 0:6] = (90, 190, 90)
    Image.fromarray(canvas).resize((SIDE * 8, SIDE * 8), Image.NEAREST).save(
        out / "images" / "img001.png")
    print(f"wrote 3-task annotation fixture -> {out}")


if __name__ == "__main__":
    main()
