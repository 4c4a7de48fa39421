"""Pure-Python (numpy/scipy) kernel implementations.

Drop-in replacements for the compiled core. Float expressions mirror the
compiled code operation for operation so both backends produce bit-identical
rasters; keep them in sync when editing either side.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

_STRUCT4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCT8 = np.ones((3, 3), dtype=bool)


def render_quads(quads: np.ndarray, height: int, width: int) -> np.ndarray:
    """Max-composite soft scores of quads onto a float64 canvas.

    quads: (n, 4, 2) vertex array. Each pixel inside a quad (even-odd rule at
    the pixel center) gets 0.5 * (D_w + D_h), where each D term is one minus
    the normalized imbalance of the distances to one opposite-edge pair.
    """
    out = np.zeros((height, width), dtype=np.float64)
    quads = np.asarray(quads, dtype=np.float64)
    for q in quads:
        ax, ay = q[:, 0], q[:, 1]
        bx = np.roll(ax, -1)
        by = np.roll(ay, -1)
        ex = bx - ax
        ey = by - ay
        lens = np.sqrt(ex * ex + ey * ey)
        long02 = lens[0] + lens[2] >= lens[1] + lens[3]

        x0 = max(0, int(math.floor(ax.min())) - 1)
        x1 = min(width - 1, int(math.ceil(ax.max())) + 1)
        y0 = max(0, int(math.floor(ay.min())) - 1)
        y1 = min(height - 1, int(math.ceil(ay.max())) + 1)
        if x0 > x1 or y0 > y1:
            continue
        cx = (np.arange(x0, x1 + 1, dtype=np.float64) + 0.5)[None, :]
        cy = (np.arange(y0, y1 + 1, dtype=np.float64) + 0.5)[:, None]

        inside = np.zeros((y1 - y0 + 1, x1 - x0 + 1), dtype=bool)
        for i in range(4):
            if ay[i] == by[i]:
                continue
            crosses = (ay[i] > cy) != (by[i] > cy)
            xc = ax[i] + (cy - ay[i]) * (bx[i] - ax[i]) / (by[i] - ay[i])
            inside ^= crosses & (cx < xc)
        if not inside.any():
            continue

        d = [np.abs(ex[i] * (cy - ay[i]) - ey[i] * (cx - ax[i])) / lens[i]
             for i in range(4)]
        if long02:
            dl, dr, dt, db = d[3], d[1], d[0], d[2]
        else:
            dl, dr, dt, db = d[0], d[2], d[1], d[3]
        span_w = dl + dr
        span_h = dt + db
        with np.errstate(divide="ignore", invalid="ignore"):
            dw = 1.0 - np.abs(dr - dl) / span_w
            dh = 1.0 - np.abs(db - dt) / span_h
        dw = np.where(span_w > 0.0, dw, 0.0)
        dh = np.where(span_h > 0.0, dh, 0.0)
        val = 0.5 * (dw + dh)

        region = out[y0:y1 + 1, x0:x1 + 1]
        np.maximum(region, np.where(inside, val, 0.0), out=region)
    return out


def label_components(mask: np.ndarray, connectivity: int = 8):
    """Connected-component labels in row-major first-encounter order.

    Returns (labels int32, count). Label k's first pixel in raster order
    precedes label k+1's, which makes outputs stable across backends.
    """
    structure = _STRUCT8 if connectivity == 8 else _STRUCT4
    raw, n = ndimage.label(np.asarray(mask, dtype=bool), structure=structure)
    if n == 0:
        return raw.astype(np.int32), 0
    flat = raw.ravel()
    nz = np.flatnonzero(flat)
    uniq, first_pos = np.unique(flat[nz], return_index=True)
    order = np.argsort(nz[first_pos], kind="stable")
    remap = np.zeros(n + 1, dtype=np.int32)
    remap[uniq[order]] = np.arange(1, n + 1, dtype=np.int32)
    return remap[raw], n


def partition_nearest_seed(omask: np.ndarray, seed_window: np.ndarray,
                           seed_ids: np.ndarray) -> np.ndarray:
    """Assign each masked pixel to its nearest seed (index into seed_ids).

    Distances are exact Euclidean between pixel centers; ties go to the
    earlier entry of seed_ids (callers pass ids ascending, so the smaller
    label wins). Pixels outside omask get -1.
    """
    omask = np.asarray(omask, dtype=bool)
    seed_ids = np.asarray(seed_ids)
    dists = np.empty((len(seed_ids),) + omask.shape, dtype=np.float64)
    for j, sid in enumerate(seed_ids):
        dists[j] = ndimage.distance_transform_edt(seed_window != sid)
    assign = np.argmin(dists, axis=0).astype(np.int32)
    assign[~omask] = -1
    return assign
