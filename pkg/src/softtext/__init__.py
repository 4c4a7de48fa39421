"""Soft text score-map toolkit.

Renders soft segmentation labels for text boxes, extracts boxes back out of
score-map pairs via dual-threshold connected components, and scores
detections ICDAR-style. A deterministic synthetic-scene generator stands in
for a trained score-map model so the whole loop is testable offline.
"""

from ._kernels import BACKEND
from .evalproto import EvalReport, MatchResult, evaluate_corpus, match_detections, prf
from .extraction import ExtractionParams, LabelMap, connected_components, extract_boxes
from .geometry import (EdgeDistances, Point, Quad, edge_distances, min_area_rect,
                       point_in_quad, polygon_area, polygon_iou, shrink_quad)
from .labelgen import (AnnotatedScene, ScoreMapPair, TextBox, gen_label_pair,
                       render_score_map, soft_score)
from .losses import LossParams, cgan_d_loss, cgan_g_loss, combined_objective, l2_term
from .synth import NoiseSpec, SynthConfig, make_corpus, perturb_map, synth_scene

__version__ = "0.1.0"

__all__ = [
    "AnnotatedScene", "BACKEND", "EdgeDistances", "EvalReport",
    "ExtractionParams", "LabelMap", "LossParams", "MatchResult", "NoiseSpec",
    "Point", "Quad", "ScoreMapPair", "SynthConfig", "TextBox",
    "cgan_d_loss", "cgan_g_loss", "combined_objective", "connected_components",
    "edge_distances", "evaluate_corpus", "extract_boxes", "gen_label_pair",
    "l2_term", "make_corpus", "match_detections", "min_area_rect",
    "perturb_map", "point_in_quad", "polygon_area", "polygon_iou", "prf",
    "render_score_map", "shrink_quad", "soft_score", "synth_scene",
]
