"""Text box extraction from a score-map pair.

Pipeline: threshold the full map and label its components (the outer regions),
fuse the two maps into a seed mask, label the seeds, then split every outer
region among the seeds it contains by nearest-seed assignment. Each surviving
pixel group becomes one rotated rectangle.

The fusion step follows the literal recipe — sum the maps, threshold, zero
where the shrunk map is below threshold — which for nonnegative maps reduces
to thresholding the shrunk map alone; the separate fused threshold is exposed
anyway for experimentation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _kernels
from .errors import DegenerateInput, DimensionMismatch
from .geometry import Quad, min_area_rect
from .labelgen import DEFAULT_SHRINK, ScoreMap, ScoreMapPair

BinaryMask = np.ndarray  # bool, shape (height, width)


@dataclass(frozen=True)
class Component:
    label: int
    area: int
    bbox: tuple[slice, slice]  # (rows, cols) covering the component


@dataclass(frozen=True)
class LabelMap:
    labels: np.ndarray  # int32, 0 = background
    count: int
    components: list[Component]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


@dataclass(frozen=True)
class ExtractionParams:
    t: float = 0.25
    connectivity: int = 8
    min_component_px: int = 10
    shrink_r: float = DEFAULT_SHRINK  # provenance of the consumed pair
    t_fused: float | None = None  # defaults to t

    def __post_init__(self):
        if not 0.0 < self.t < 1.0:
            raise ValueError(f"threshold {self.t} outside (0, 1)")
        if self.connectivity not in (4, 8):
            raise ValueError(f"connectivity must be 4 or 8, got {self.connectivity}")
        if self.min_component_px < 1:
            raise ValueError("min_component_px must be >= 1")


def threshold(m: ScoreMap, t: float) -> BinaryMask:
    """Binary mask of pixels with value >= t."""
    return np.asarray(m) >= t


def connected_components(mask: BinaryMask, connectivity: int = 8) -> LabelMap:
    """Label connected regions; labels follow row-major first-encounter order."""
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    labels, count = _kernels.label_components(
        np.ascontiguousarray(mask, dtype=np.uint8), connectivity)
    comps = []
    if count:
        areas = np.bincount(labels.ravel(), minlength=count + 1)
        boxes = ndimage.find_objects(labels)
        comps = [Component(label=i, area=int(areas[i]), bbox=boxes[i - 1])
                 for i in range(1, count + 1)]
    return LabelMap(labels=labels, count=count, components=comps)


def fuse_masks(m1: ScoreMap, m2: ScoreMap, t: float,
               t_fused: float | None = None) -> BinaryMask:
    """Seed mask: (m1 + m2 >= t_fused) and (m2 >= t)."""
    m1 = np.asarray(m1)
    m2 = np.asarray(m2)
    if m1.shape != m2.shape:
        raise DimensionMismatch(f"map shapes differ: {m1.shape} vs {m2.shape}")
    tf = t if t_fused is None else t_fused
    return ((m1 + m2) >= tf) & (m2 >= t)


def _partition_window(omask: np.ndarray, seed_labels: np.ndarray,
                      keep_seed=None) -> list[tuple[int, np.ndarray]]:
    """Split one outer component (a window-sized bool mask) among its seeds.

    Returns [(seed_label, mask)] with seed label 0 for the implicit seed used
    when the component contains none. keep_seed, when given, is a boolean
    array over seed labels; seeds marked False are treated as absent so their
    territory reverts to the surviving seeds.
    """
    swin = np.where(omask, seed_labels, 0).astype(np.int32)
    if keep_seed is not None:
        swin = np.where(keep_seed[swin], swin, 0)
    ids = np.unique(swin)
    ids = ids[ids > 0]
    if ids.size == 0:
        return [(0, omask)]
    if ids.size == 1:
        return [(int(ids[0]), omask)]
    assign = _kernels.partition_nearest_seed(
        omask.astype(np.uint8), swin, ids.astype(np.int32))
    return [(int(sid), assign == j) for j, sid in enumerate(ids)]


def assign_nearest_seed(outer: LabelMap, outer_label: int,
                        seeds: LabelMap) -> dict[int, np.ndarray]:
    """Partition an outer component's pixels among the seed components in it.

    Every pixel goes to the seed with the smallest Euclidean distance between
    pixel centers; ties pick the smaller seed label. A component with no seed
    maps entirely to key 0. Returns {seed_label: (n, 2) array of (y, x)}.
    """
    comp = next((c for c in outer.components if c.label == outer_label), None)
    if comp is None:
        raise ValueError(f"no outer component labeled {outer_label}")
    sy, sx = comp.bbox
    omask = outer.labels[sy, sx] == outer_label
    out = {}
    for sid, gmask in _partition_window(omask, seeds.labels[sy, sx]):
        ys, xs = np.nonzero(gmask)
        out[sid] = np.stack([ys + sy.start, xs + sx.start], axis=1)
    return out


def _pixels_to_quad(cx: np.ndarray, cy: np.ndarray) -> Quad:
    """Tightest rotated rectangle around pixel centers.

    Collinear centers (single-row/column groups) carry no width, so fall back
    to the pixels' corner points, which always span a proper rectangle.
    """
    try:
        return min_area_rect(np.stack([cx, cy], axis=1))
    except DegenerateInput:
        corners = np.concatenate([
            np.stack([cx - 0.5, cy - 0.5], axis=1),
            np.stack([cx + 0.5, cy - 0.5], axis=1),
            np.stack([cx + 0.5, cy + 0.5], axis=1),
            np.stack([cx - 0.5, cy + 0.5], axis=1),
        ])
        return min_area_rect(corners)


def extract_boxes(pair: ScoreMapPair, params: ExtractionParams | None = None
                  ) -> list[Quad]:
    """Run the full dual-map box extraction; output ordered by seed label."""
    params = params or ExtractionParams()
    bs1 = threshold(pair.map_full, params.t)
    outer = connected_components(bs1, params.connectivity)
    bs = fuse_masks(pair.map_full, pair.map_shrunk, params.t, params.t_fused)
    seeds = connected_components(bs, params.connectivity)

    # the pixel floor also applies to seeds: speckle-sized seeds would
    # otherwise carve spurious territories out of real components
    keep_seed = np.ones(seeds.count + 1, dtype=bool)
    for seed_comp in seeds.components:
        if seed_comp.area < params.min_component_px:
            keep_seed[seed_comp.label] = False

    entries: list[tuple[tuple[int, int], Quad]] = []
    for comp in outer.components:
        sy, sx = comp.bbox
        omask = outer.labels[sy, sx] == comp.label
        for sid, gmask in _partition_window(omask, seeds.labels[sy, sx], keep_seed):
            if int(gmask.sum()) < params.min_component_px:
                continue
            ys, xs = np.nonzero(gmask)
            cx = xs + (sx.start + 0.5)
            cy = ys + (sy.start + 0.5)
            sort_key = sid if sid > 0 else seeds.count + comp.label
            entries.append(((sort_key, comp.label), _pixels_to_quad(cx, cy)))
    entries.sort(key=lambda e: e[0])
    return [quad for _, quad in entries]
