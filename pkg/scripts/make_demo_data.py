#!/usr/bin/env python3
"""Generate a small self-consistent demo dataset plus every feature file
the CLI pipeline consumes. Deterministic given --seed.

Layout written under --out:
  images.json segments.json questions.json links.json   dataset files
  images/*.png                                           rendered images
  word_vectors.txt                                       toy embedding table
  image_features.vqsf region_features.vqsf               per-image stores
  segment_features.vqsf proposal_features.vqsf           per-candidate stores
  proposals.json                                         proposal masks (RLE)
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from vqs.features import tokenize, write_feature_store
from vqs.masks import box_to_mask, rle_encode

GRID = 2
REGION_DIM = 6
IMG_SIDE = 16
CATEGORIES = ["cat", "dog", "car", "tree", "ball", "cup"]
PALETTE = [(220, 70, 60), (60, 160, 220), (90, 200, 90), (240, 180, 50), (170, 100, 220), (90, 220, 200)]


def block(h, w, r0, r1, c0, c1):
    m = np.zeros((h, w), dtype=bool)
    m[r0:r1, c0:c1] = True
    return m


def random_block(rng):
    r0 = int(rng.integers(0, IMG_SIDE - 4))
    c0 = int(rng.integers(0, IMG_SIDE - 4))
    r1 = r0 + int(rng.integers(3, IMG_SIDE - r0))
    c1 = c0 + int(rng.integers(3, IMG_SIDE - c0))
    return block(IMG_SIDE, IMG_SIDE, r0, r1, c0, c1)


def render_png(path, masks, colors):
    from PIL import Image

    canvas = np.full((IMG_SIDE, IMG_SIDE, 3), 235, dtype=np.uint8)
    for m, color in zip(masks, colors):
        canvas[m] = color
    Image.fromarray(canvas).resize((IMG_SIDE * 8, IMG_SIDE * 8), Image.NEAREST).save(path)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    parser.add_argument("--images", type=int, default=12)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    out = Path(args.out)
    (out / "images").mkdir(parents=True, exist_ok=True)

    images, segments, questions, links = [], [], [], []
    proposals = []
    seg_rows, prop_rows = {}, {}
    next_seg, next_q, next_prop = 1000, 5000, 9000

    for image_id in range(1, args.images + 1):
        file_name = f"img{image_id:03d}.png"
        images.append({"image_id": image_id, "file_name": file_name,
                       "width": IMG_SIDE, "height": IMG_SIDE})

        n_segments = int(rng.integers(3, 6))
        cats = rng.choice(CATEGORIES, size=n_segments, replace=True)
        seg_masks, seg_ids = [], []
        for k in range(n_segments):
            mask = random_block(rng)
            sid = next_seg
            next_seg += 1
            seg_ids.append(sid)
            seg_masks.append(mask)
            segments.append({
                "segment_id": sid, "image_id": image_id,
                "encoding": rle_encode(mask).to_json(),
                "category": str(cats[k]), "display_color": k % len(PALETTE),
            })
            # category one-hot plus noise; the question vector supplies context
            onehot = np.zeros(len(CATEGORIES))
            onehot[CATEGORIES.index(cats[k])] = 1.0
            seg_rows[sid] = np.concatenate((onehot, rng.normal(0, 0.05, 4)))
        render_png(out / "images" / file_name, seg_masks,
                   [PALETTE[k % len(PALETTE)] for k in range(n_segments)])

        # proposals: the true segments plus random fillers, 5 per image
        for j in range(5):
            mask = seg_masks[j] if j < len(seg_masks) else random_block(rng)
            pid = next_prop
            next_prop += 1
            proposals.append({"proposal_id": pid, "image_id": image_id,
                              "encoding": rle_encode(mask).to_json()})
            onehot = np.zeros(5)
            onehot[j] = 1.0
            prop_rows[pid] = np.concatenate((onehot, rng.normal(0, 0.05, 3)))

        # a few questions per image, varied types
        first_cat = str(cats[0])
        same_cat = [sid for sid, c in zip(seg_ids, cats) if c == cats[0]]
        qa = [
            (f"How many {first_cat} are there?", str(len(same_cat)), same_cat, []),
            (f"What color is the {first_cat}?", "red", [seg_ids[0]], []),
            (f"Is the {first_cat} near the {cats[-1]}?", "yes", [seg_ids[0], seg_ids[-1]], []),
        ]
        if image_id % 3 == 0:
            qa.append((f"Where is the {cats[1]}?",
                       "left", [seg_ids[1]], [{"x": 1, "y": 1, "w": 3, "h": 3}]))
        if image_id % 5 == 0:
            qa.append(("Can anything be seen?", "yes", [], []))  # flagged below
        for question, answer, selected, boxes in qa:
            qid = next_q
            next_q += 1
            distractors = [w for w in
                           ["blue", "green", "no", "two", "three", "four", "five", "left",
                            "right", "top", "bottom", "red", "yes", "one", "six", "seven",
                            "eight", "nine", "zero", "white", "black"]
                           if w != answer]
            candidates = [answer] + distractors[:17]
            order = rng.permutation(18)
            candidates = [candidates[i] for i in order]
            questions.append({"question_id": qid, "image_id": image_id,
                              "question": question, "answer": answer,
                              "candidates": candidates})
            flag = "none"
            if not selected and not boxes:
                flag = "full_image" if image_id % 2 else "ambiguous"
            links.append({"question_id": qid, "selected_segment_ids": selected,
                          "boxes": boxes, "flag": flag, "annotator_id": f"annotator{image_id % 3}"})

    for name, rows in [("images.json", images), ("segments.json", segments),
                       ("questions.json", questions), ("links.json", links),
                       ("proposals.json", proposals)]:
        (out / name).write_text(json.dumps(rows, indent=1), encoding="utf-8")

    # toy word vectors covering every token in questions and answers
    vocab = set()
    for q in questions:
        vocab.update(tokenize(q["question"]))
        vocab.update(tokenize(q["answer"]))
        for c in q["candidates"]:
            vocab.update(tokenize(c))
    wv_dim = 16
    lines = []
    for word in sorted(vocab):
        vec = np.random.default_rng(abs(hash(word)) % 2**32).normal(0, 1, wv_dim)
        lines.append(word + " " + " ".join(f"{v:.6f}" for v in vec))
    (out / "word_vectors.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    image_ids = np.array([im["image_id"] for im in images], dtype=np.uint64)
    write_feature_store(out / "image_features.vqsf", image_ids,
                        rng.normal(0, 1, (len(images), 8)).astype(np.float32))
    write_feature_store(out / "region_features.vqsf", image_ids,
                        rng.normal(0, 1, (len(images), GRID * GRID * REGION_DIM)).astype(np.float32))
    write_feature_store(out / "segment_features.vqsf",
                        np.array(sorted(seg_rows), dtype=np.uint64),
                        np.stack([seg_rows[k] for k in sorted(seg_rows)]).astype(np.float32))
    write_feature_store(out / "proposal_features.vqsf",
                        np.array(sorted(prop_rows), dtype=np.uint64),
                        np.stack([prop_rows[k] for k in sorted(prop_rows)]).astype(np.float32))
    print(f"wrote demo dataset: {len(images)} images, {len(questions)} questions -> {out}")


if __name__ == "__main__":
    main()
