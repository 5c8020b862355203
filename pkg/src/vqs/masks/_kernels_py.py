"""NumPy implementations of the pixel kernels.

Selected at import time when the compiled extension (`_kernels`) is absent
or when VQS_MASK_BACKEND=python is set. Both backends expose the same
functions over the same dtypes: uint8 bit buffers, float64 everywhere else.
"""

import numpy as np

BACKEND = "python"


def rle_encode_counts(flat):
    """Run lengths of a flat 0/1 sequence, starting with the zero-run."""
    flat = np.ascontiguousarray(flat, dtype=np.uint8)
    n = flat.size
    changes = np.flatnonzero(np.diff(flat)) + 1
    starts = np.concatenate(([0], changes, [n]))
    runs = np.diff(starts).tolist()
    if flat[0] == 1:
        runs.insert(0, 0)
    return runs


def rle_decode_fill(counts, n):
    """Expand alternating 0/1 run lengths into a flat uint8 buffer."""
    counts = np.asarray(counts, dtype=np.int64)
    vals = np.zeros(counts.size, dtype=np.uint8)
    vals[1::2] = 1
    return np.repeat(vals, counts)


def iou_counts(a, b):
    """(intersection, union) pixel counts for two uint8 bit buffers."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    inter = int(np.count_nonzero(a & b))
    uni = int(np.count_nonzero(a | b))
    return inter, uni


def downsample_fractions(mask, g):
    """g x g grid of per-cell foreground fractions.

    Cell (i, j) covers rows [floor(i*H/g), floor((i+1)*H/g)) and the
    analogous column range; cells with no pixels (g > H or g > W) get 0.
    """
    mask = np.asarray(mask, dtype=np.uint8)
    h, w = mask.shape
    rb = (np.arange(g + 1, dtype=np.int64) * h) // g
    cb = (np.arange(g + 1, dtype=np.int64) * w) // g
    integral = np.zeros((h + 1, w + 1), dtype=np.int64)
    integral[1:, 1:] = mask.cumsum(axis=0).cumsum(axis=1)
    corner = integral[np.ix_(rb, cb)]
    counts = corner[1:, 1:] - corner[:-1, 1:] - corner[1:, :-1] + corner[:-1, :-1]
    areas = (rb[1:] - rb[:-1])[:, None] * (cb[1:] - cb[:-1])[None, :]
    return np.where(areas > 0, counts / np.maximum(areas, 1), 0.0)


def aggregate_soft(masks, weights):
    """Weighted sum over N flat masks: out[p] = sum_i w[i] * masks[i, p]."""
    masks = np.asarray(masks, dtype=np.uint8)
    weights = np.asarray(weights, dtype=np.float64)
    return weights @ masks


def polygon_inside(px, py, vx, vy):
    """Even-odd (crossing number) point-in-polygon test.

    px, py: point coordinates; vx, vy: polygon vertices in order.
    Returns a uint8 array, 1 where the point is inside.
    """
    px = np.asarray(px, dtype=np.float64)
    py = np.asarray(py, dtype=np.float64)
    inside = np.zeros(px.shape, dtype=bool)
    nv = len(vx)
    j = nv - 1
    for i in range(nv):
        crosses = (vy[i] > py) != (vy[j] > py)
        if np.any(crosses):
            xint = (vx[j] - vx[i]) * (py[crosses] - vy[i]) / (vy[j] - vy[i]) + vx[i]
            hits = crosses.copy()
            hits[crosses] = px[crosses] < xint
            inside ^= hits
        j = i
    return inside.astype(np.uint8)
