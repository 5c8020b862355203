"""Binary-mask representations, codecs, geometry, and soft-mask algebra.

Conventions: a binary mask is a 2-D numpy bool array of shape (height,
width); a soft mask is a float64 array of the same shape with values in
[0, 1]; a probability grid is a float64 (g, g) array summing to 1. Run
lengths follow the COCO convention: pixels are traversed column-major
(down each column, left to right) and counts alternate zero-runs and
one-runs, starting with the zero-run, so the first count may be 0.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from ..errors import (
    CountMismatch,
    DegeneratePolygon,
    DimensionMismatch,
    InvalidSimplex,
    NegativeEntry,
)

if os.environ.get("VQS_MASK_BACKEND", "").lower() == "python":
    from . import _kernels_py as _impl
else:  # pragma: no cover - exercised via the import-time environment
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl


def backend() -> str:
    """Name of the kernel backend selected at import ('cython' or 'python')."""
    return _impl.BACKEND


SIMPLEX_TOL = 1e-6


@dataclass
class RleMask:
    """Run-length encoded binary mask (column-major, zero-run first)."""

    height: int
    width: int
    counts: list[int] = field(default_factory=list)

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise DimensionMismatch(f"mask dimensions must be positive, got {self.height}x{self.width}")
        if any(c < 0 for c in self.counts):
            raise CountMismatch("run lengths must be non-negative")

    def to_json(self) -> dict:
        return {"size": [self.height, self.width], "counts": list(self.counts)}

    @classmethod
    def from_json(cls, obj: dict) -> "RleMask":
        h, w = obj["size"]
        return cls(height=int(h), width=int(w), counts=[int(c) for c in obj["counts"]])


@dataclass
class Polygon:
    """Closed polygon in image coordinates; vertices are (x, y) pairs."""

    vertices: list[tuple[float, float]]

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise DegeneratePolygon(f"polygon needs >= 3 vertices, got {len(self.vertices)}")

    def to_json(self) -> dict:
        return {"vertices": [[float(x), float(y)] for x, y in self.vertices]}

    @classmethod
    def from_json(cls, obj: dict) -> "Polygon":
        return cls(vertices=[(float(x), float(y)) for x, y in obj["vertices"]])


@dataclass
class Box:
    """Axis-aligned box: top-left offset (x, y) plus extents (w, h)."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise DimensionMismatch(f"box extents must be >= 1, got w={self.w}, h={self.h}")

    def to_json(self) -> dict:
        return {"x": self.x, "y": self.y, "w": self.w, "h": self.h}

    @classmethod
    def from_json(cls, obj: dict) -> "Box":
        return cls(x=int(obj["x"]), y=int(obj["y"]), w=int(obj["w"]), h=int(obj["h"]))


def as_mask(arr) -> np.ndarray:
    """Coerce to a 2-D bool mask, rejecting anything else."""
    mask = np.asarray(arr)
    if mask.ndim != 2 or mask.shape[0] < 1 or mask.shape[1] < 1:
        raise DimensionMismatch(f"expected a 2-D mask, got shape {mask.shape}")
    return mask.astype(bool)


def _check_same_shape(a: np.ndarray, b: np.ndarray):
    if a.shape != b.shape:
        raise DimensionMismatch(f"mask shapes differ: {a.shape} vs {b.shape}")


def rle_encode(mask) -> RleMask:
    """Encode a binary mask as column-major run lengths."""
    mask = as_mask(mask)
    h, w = mask.shape
    flat = np.ascontiguousarray(mask.T.reshape(-1), dtype=np.uint8)
    counts = [int(c) for c in _impl.rle_encode_counts(flat)]
    return RleMask(height=h, width=w, counts=counts)


def rle_decode(rle: RleMask) -> np.ndarray:
    """Decode run lengths back to a binary mask; inverse of rle_encode."""
    total = rle.height * rle.width
    if sum(rle.counts) != total:
        raise CountMismatch(
            f"counts sum to {sum(rle.counts)}, expected {rle.height}x{rle.width}={total}"
        )
    flat = _impl.rle_decode_fill(np.asarray(rle.counts, dtype=np.int64), total)
    return flat.reshape((rle.width, rle.height)).T.astype(bool)


def rasterize_polygon(polygon: Polygon, height: int, width: int) -> np.ndarray:
    """Fill pixels whose center lies inside the polygon (even-odd rule)."""
    if len(polygon.vertices) < 3:
        raise DegeneratePolygon("polygon needs >= 3 vertices")
    cols, rows = np.meshgrid(np.arange(width), np.arange(height))
    px = cols.reshape(-1) + 0.5
    py = rows.reshape(-1) + 0.5
    vx = np.asarray([v[0] for v in polygon.vertices], dtype=np.float64)
    vy = np.asarray([v[1] for v in polygon.vertices], dtype=np.float64)
    inside = _impl.polygon_inside(px, py, vx, vy)
    return np.asarray(inside, dtype=bool).reshape((height, width))


def box_to_mask(box: Box, height: int, width: int) -> np.ndarray:
    """Rasterize a box, clamped to the image bounds."""
    mask = np.zeros((height, width), dtype=bool)
    r0, r1 = max(box.y, 0), min(box.y + box.h, height)
    c0, c1 = max(box.x, 0), min(box.x + box.w, width)
    if r0 < r1 and c0 < c1:
        mask[r0:r1, c0:c1] = True
    return mask


def union(masks) -> np.ndarray:
    """Pixel-wise OR of one or more same-shaped masks."""
    masks = [as_mask(m) for m in masks]
    if not masks:
        raise DimensionMismatch("union of an empty list")
    out = masks[0].copy()
    for m in masks[1:]:
        _check_same_shape(out, m)
        out |= m
    return out


def iou(a, b) -> float:
    """Intersection over union; 1.0 when both masks are empty."""
    a = as_mask(a)
    b = as_mask(b)
    _check_same_shape(a, b)
    inter, uni = _impl.iou_counts(
        np.ascontiguousarray(a.reshape(-1), dtype=np.uint8),
        np.ascontiguousarray(b.reshape(-1), dtype=np.uint8),
    )
    if uni == 0:
        return 1.0
    return inter / uni


def downsample_to_grid(mask, g: int) -> np.ndarray:
    """Per-cell foreground fraction on a g x g grid with floor boundaries."""
    mask = as_mask(mask)
    if g < 1:
        raise DimensionMismatch(f"grid side must be >= 1, got {g}")
    return np.asarray(_impl.downsample_fractions(np.ascontiguousarray(mask, dtype=np.uint8), g))


def normalize_l1(grid) -> np.ndarray:
    """Scale a non-negative grid to sum 1; all-zero input becomes uniform."""
    grid = np.asarray(grid, dtype=np.float64)
    if np.any(grid < 0):
        raise NegativeEntry("grid has negative entries")
    total = grid.sum()
    if total == 0:
        return np.full(grid.shape, 1.0 / grid.size)
    return grid / total


def check_simplex(weights, tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Validate non-negative weights summing to 1 within tol."""
    weights = np.asarray(weights, dtype=np.float64)
    if np.any(weights < 0):
        raise InvalidSimplex("weights must be non-negative")
    if abs(weights.sum() - 1.0) > tol:
        raise InvalidSimplex(f"weights sum to {weights.sum()}, expected 1")
    return weights


def aggregate(masks, weights) -> np.ndarray:
    """Convex combination of binary masks; output values stay in [0, 1]."""
    weights = check_simplex(weights)
    masks = [as_mask(m) for m in masks]
    if len(masks) != weights.size:
        raise DimensionMismatch(f"{len(masks)} masks vs {weights.size} weights")
    shape = masks[0].shape
    for m in masks[1:]:
        _check_same_shape(masks[0], m)
    stacked = np.ascontiguousarray(
        np.stack([m.reshape(-1) for m in masks]), dtype=np.uint8
    )
    soft = np.asarray(_impl.aggregate_soft(stacked, weights))
    return soft.reshape(shape)


def threshold(soft, tau: float) -> np.ndarray:
    """Binarize a soft mask: pixel set iff value >= tau."""
    soft = np.asarray(soft, dtype=np.float64)
    return soft >= tau
