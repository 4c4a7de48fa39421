"""Soft text score-map rendering.

A score map is a float32 raster in [0, 1]: 1 on a box's center lines, falling
off linearly toward its edges, 0 on background. Training labels come in pairs,
one rendered from the annotated boxes as-is and one from boxes contracted by a
shrink fraction so that adjacent instances separate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DegenerateQuad
from .geometry import Point, Quad, edge_distances, shrink_quad

DEFAULT_SHRINK = 0.2

ScoreMap = np.ndarray  # float32, shape (height, width)


@dataclass(frozen=True)
class TextBox:
    quad: Quad
    transcript: str = ""
    ignore: bool = False


@dataclass(frozen=True)
class AnnotatedScene:
    """Image-sized canvas plus its annotated text boxes.

    Boxes are clipped to the image bounds on construction (vertices clamped);
    a box that degenerates under clamping is dropped.
    """

    width: int
    height: int
    boxes: list[TextBox] = field(default_factory=list)

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"bad scene size {self.width}x{self.height}")
        clipped = []
        for box in self.boxes:
            pts = box.quad.pts
            if (pts[:, 0].min() < 0 or pts[:, 1].min() < 0
                    or pts[:, 0].max() > self.width or pts[:, 1].max() > self.height):
                pts = pts.copy()
                pts[:, 0] = np.clip(pts[:, 0], 0.0, float(self.width))
                pts[:, 1] = np.clip(pts[:, 1], 0.0, float(self.height))
                try:
                    box = TextBox(Quad(pts), box.transcript, box.ignore)
                except DegenerateQuad:
                    continue
            clipped.append(box)
        object.__setattr__(self, "boxes", clipped)

    def translated(self, dx: float, dy: float, width: int, height: int) -> "AnnotatedScene":
        moved = [TextBox(b.quad.translated(dx, dy), b.transcript, b.ignore)
                 for b in self.boxes]
        return AnnotatedScene(width, height, moved)


@dataclass(frozen=True)
class ScoreMapPair:
    """The two training rasters: shrink 0 and shrink `shrink_r`."""

    map_full: ScoreMap
    map_shrunk: ScoreMap
    shrink_r: float = DEFAULT_SHRINK

    def __post_init__(self):
        if self.map_full.shape != self.map_shrunk.shape:
            from .errors import DimensionMismatch

            raise DimensionMismatch(
                f"pair shapes differ: {self.map_full.shape} vs {self.map_shrunk.shape}")

    @property
    def height(self) -> int:
        return self.map_full.shape[0]

    @property
    def width(self) -> int:
        return self.map_full.shape[1]


def soft_score(p: Point, q: Quad) -> float:
    """Soft score of an interior point: 0.5 * (D_w + D_h).

    D_w = 1 - |d_right - d_left| / (d_left + d_right) and likewise D_h, so the
    value is 1 where both edge-distance pairs balance (the center), and falls
    to 0 on edges and corners. Raises OutsideQuad off the box.
    """
    d = edge_distances(p, q)
    dw = 1.0 - abs(d.d_right - d.d_left) / d.span_w if d.span_w > 0.0 else 0.0
    dh = 1.0 - abs(d.d_bottom - d.d_top) / d.span_h if d.span_h > 0.0 else 0.0
    return 0.5 * (dw + dh)


def render_score_map(scene: AnnotatedScene, r: float = 0.0) -> ScoreMap:
    """Render the soft score map of a scene with every box shrunk by r.

    Pixels are sampled at their centers (x + 0.5, y + 0.5); overlapping boxes
    combine with per-pixel max. Ignore boxes render like any other: a model
    trained on these labels cannot tell them apart, so the labels should not
    either — they are excluded at evaluation time instead.
    """
    if not scene.boxes:
        return np.zeros((scene.height, scene.width), dtype=np.float32)
    quads = np.stack([shrink_quad(b.quad, r).pts for b in scene.boxes])
    canvas = _kernels.render_quads(quads, scene.height, scene.width)
    return canvas.astype(np.float32)


def gen_label_pair(scene: AnnotatedScene, shrink_r: float = DEFAULT_SHRINK) -> ScoreMapPair:
    """Render the (full, shrunk) score-map pair for a scene."""
    return ScoreMapPair(
        map_full=render_score_map(scene, 0.0),
        map_shrunk=render_score_map(scene, shrink_r),
        shrink_r=shrink_r,
    )
