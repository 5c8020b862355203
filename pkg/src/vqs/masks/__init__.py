"""Mask representations, codecs, geometry, and soft-mask algebra."""

from .core import (
    Box,
    Polygon,
    RleMask,
    aggregate,
    as_mask,
    backend,
    box_to_mask,
    check_simplex,
    downsample_to_grid,
    iou,
    normalize_l1,
    rasterize_polygon,
    rle_decode,
    rle_encode,
    threshold,
    union,
)

__all__ = [
    "Box",
    "Polygon",
    "RleMask",
    "aggregate",
    "as_mask",
    "backend",
    "box_to_mask",
    "check_simplex",
    "downsample_to_grid",
    "iou",
    "normalize_l1",
    "rasterize_polygon",
    "rle_decode",
    "rle_encode",
    "threshold",
    "union",
]
