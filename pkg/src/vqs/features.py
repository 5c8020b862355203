"""Text featurization and id-indexed numeric feature stores.

Precomputed features (image, region, proposal, attribute scores) arrive in
the VQSF binary format, little-endian throughout:

  magic "VQSF" | version u32 (=1) | count u64 | dim u32
  | count ids as u64 | count rows of dim float32, row-major

Word vectors load from plain text: one entry per line, the word followed
by its components, space-separated.
"""

from __future__ import annotations

import re
import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadMagic, CorpusTooSmall, DimMismatch, DuplicateId, TruncatedFile

MAGIC = b"VQSF"
VERSION = 1

_TOKEN = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on anything non-alphanumeric."""
    return _TOKEN.findall(text.lower())


@dataclass
class WordVectorTable:
    dim: int
    entries: dict[str, np.ndarray]

    @classmethod
    def load(cls, path) -> "WordVectorTable":
        entries = {}
        dim = None
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            parts = line.split()
            if not parts:
                continue
            word, values = parts[0], np.asarray([float(v) for v in parts[1:]], dtype=np.float64)
            if dim is None:
                dim = values.size
            elif values.size != dim:
                raise DimMismatch(f"word '{word}' has {values.size} components, expected {dim}")
            entries[word] = values
        if dim is None:
            raise DimMismatch(f"{path} contains no vectors")
        return cls(dim=dim, entries=entries)

    def save(self, path):
        lines = [
            " ".join([word] + [repr(float(v)) for v in vec])
            for word, vec in self.entries.items()
        ]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass
class Vocab:
    words: list[str]

    def __post_init__(self):
        if len(set(self.words)) != len(self.words):
            raise DuplicateId("vocabulary has duplicate words")
        self.index = {w: i for i, w in enumerate(self.words)}

    def __len__(self):
        return len(self.words)


@dataclass
class FeatureStore:
    dim: int
    ids: np.ndarray  # uint64, file order
    matrix: np.ndarray  # (count, dim) float32

    def __post_init__(self):
        self._row = {}
        for i, fid in enumerate(self.ids.tolist()):
            if fid in self._row:
                raise DuplicateId(f"feature id {fid} appears twice")
            self._row[fid] = i

    def __contains__(self, fid) -> bool:
        return int(fid) in self._row

    def __len__(self):
        return len(self._row)

    def vector(self, fid) -> np.ndarray:
        return self.matrix[self._row[int(fid)]]


def write_feature_store(path, ids, matrix):
    """Write id-indexed float32 vectors in the VQSF layout."""
    matrix = np.ascontiguousarray(matrix, dtype=np.float32)
    ids = np.ascontiguousarray(ids, dtype=np.uint64)
    count, dim = matrix.shape
    if ids.size != count:
        raise DimMismatch(f"{ids.size} ids for {count} rows")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IQI", VERSION, count, dim))
        fh.write(ids.astype("<u8").tobytes())
        fh.write(matrix.astype("<f4").tobytes())


def load_feature_store(path) -> FeatureStore:
    """Read a VQSF file back, bit-exact."""
    blob = Path(path).read_bytes()
    if blob[:4] != MAGIC:
        raise BadMagic(f"{path} does not start with {MAGIC!r}")
    header_end = 4 + struct.calcsize("<IQI")
    if len(blob) < header_end:
        raise TruncatedFile(f"{path} ends inside the header")
    version, count, dim = struct.unpack("<IQI", blob[4:header_end])
    if version != VERSION:
        raise BadMagic(f"{path} has unsupported version {version}")
    ids_end = header_end + count * 8
    data_end = ids_end + count * dim * 4
    if len(blob) < data_end:
        raise TruncatedFile(f"{path} has {len(blob)} bytes, expected {data_end}")
    ids = np.frombuffer(blob, dtype="<u8", count=count, offset=header_end)
    matrix = np.frombuffer(blob, dtype="<f4", count=count * dim, offset=ids_end).reshape(count, dim)
    return FeatureStore(dim=dim, ids=ids.copy(), matrix=matrix.copy())


def embed_text(text: str, table: WordVectorTable) -> np.ndarray:
    """Average the in-vocabulary word vectors and l2-normalize.

    Text with no in-vocabulary token embeds to the zero vector, left
    unnormalized.
    """
    vectors = [table.entries[t] for t in tokenize(text) if t in table.entries]
    if not vectors:
        return np.zeros(table.dim)
    mean = np.mean(vectors, axis=0)
    norm = np.linalg.norm(mean)
    return mean / norm if norm > 0 else mean


def bow_features(text: str, vocab: Vocab) -> np.ndarray:
    """l2-normalized token-count vector over the vocabulary."""
    out = np.zeros(len(vocab))
    for token in tokenize(text):
        idx = vocab.index.get(token)
        if idx is not None:
            out[idx] += 1.0
    norm = np.linalg.norm(out)
    return out / norm if norm > 0 else out


def build_attribute_vocab(corpus, stopwords, c: int = 256) -> Vocab:
    """The c most frequent non-stopword tokens, ties broken lexicographically."""
    stopset = set(stopwords)
    counts = Counter(t for text in corpus for t in tokenize(text) if t not in stopset)
    if len(counts) < c:
        raise CorpusTooSmall(f"{len(counts)} distinct non-stopwords, need {c}")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocab(words=[w for w, _ in ranked[:c]])


def build_bow_vocab(texts, k: int = 1000) -> Vocab:
    """Top-k question words by frequency; smaller corpora keep what they have."""
    counts = Counter(t for text in texts for t in tokenize(text))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocab(words=[w for w, _ in ranked[:k]])


def assemble_vqa_input(x_i, x_q, x_a, x_att=None, dims=None) -> np.ndarray:
    """Concatenate image, question, answer, and optional attention features.

    `dims`, when given, pins the expected component dimensions (attention
    dim may be None when the component is absent).
    """
    parts = [np.asarray(x_i, dtype=np.float64).reshape(-1),
             np.asarray(x_q, dtype=np.float64).reshape(-1),
             np.asarray(x_a, dtype=np.float64).reshape(-1)]
    if x_att is not None:
        parts.append(np.asarray(x_att, dtype=np.float64).reshape(-1))
    if dims is not None:
        expected = [d for d in dims if d is not None]
        if len(expected) != len(parts) or any(p.size != d for p, d in zip(parts, expected)):
            raise DimMismatch(
                f"component dims {[p.size for p in parts]} do not match configured {list(dims)}"
            )
    return np.concatenate(parts)
