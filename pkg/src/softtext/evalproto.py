"""Detection evaluation: IoU matching, ignore handling, precision/recall/F.

Matching is greedy over candidate pairs sorted by IoU descending (ties by
ground-truth index, then detection index), one-to-one, accepting only pairs
strictly above the IoU threshold. Corpus scores are micro-averaged: counts are
summed across images before the ratios are taken.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import MissingImage
from .formats import read_detections_file, read_gt_file
from .geometry import Quad, polygon_area, polygon_intersection_area, polygon_iou

IGNORE_OVERLAP = 0.5  # detection is discarded above this fraction inside an ignore box


@dataclass(frozen=True)
class MatchResult:
    tp: int
    fp: int
    fn: int
    pairs: list[tuple[int, int, float]]  # (det index, gt index, IoU)


@dataclass(frozen=True)
class EvalReport:
    images: list[tuple[str, MatchResult]]
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f_measure: float


def filter_ignored(dets: list[Quad], ignores: list[Quad]) -> list[Quad]:
    """Drop detections lying mostly (> 50% of their area) inside an ignore box."""
    if not ignores:
        return list(dets)
    kept = []
    for det in dets:
        area = polygon_area(det)
        if not any(polygon_intersection_area(det, ig) / area > IGNORE_OVERLAP
                   for ig in ignores):
            kept.append(det)
    return kept


def match_detections(dets: list[Quad], gts: list[Quad],
                     iou_thr: float = 0.5) -> MatchResult:
    """Greedy one-to-one matching at IoU strictly above iou_thr."""
    candidates = []
    for g, gt in enumerate(gts):
        for d, det in enumerate(dets):
            iou = polygon_iou(det, gt)
            if iou > iou_thr:
                candidates.append((iou, g, d))
    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))
    used_g: set[int] = set()
    used_d: set[int] = set()
    pairs = []
    for iou, g, d in candidates:
        if g in used_g or d in used_d:
            continue
        used_g.add(g)
        used_d.add(d)
        pairs.append((d, g, iou))
    tp = len(pairs)
    return MatchResult(tp=tp, fp=len(dets) - tp, fn=len(gts) - tp, pairs=pairs)


def prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    """Precision, recall, F-measure with vacuous ratios counted as perfect.

    No detections means nothing was claimed falsely (precision 1); no ground
    truth means nothing was missed (recall 1). F is 0 whenever P + R is 0.
    """
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    f = 2.0 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f


def evaluate_image(dets: list[Quad], gt_boxes, iou_thr: float = 0.5) -> MatchResult:
    """Evaluate one image: filter ignores, then match against counted boxes."""
    ignores = [b.quad for b in gt_boxes if b.ignore]
    counted = [b.quad for b in gt_boxes if not b.ignore]
    kept = filter_ignored(dets, ignores)
    return match_detections(kept, counted, iou_thr)


def aggregate(images: list[tuple[str, MatchResult]]) -> EvalReport:
    tp = sum(m.tp for _, m in images)
    fp = sum(m.fp for _, m in images)
    fn = sum(m.fn for _, m in images)
    precision, recall, f = prf(tp, fp, fn)
    return EvalReport(images=images, tp=tp, fp=fp, fn=fn,
                      precision=precision, recall=recall, f_measure=f)


def evaluate_corpus(gt_paths: dict[str, Path], det_paths: dict[str, Path],
                    iou_thr: float = 0.5, allow_missing: bool = False) -> EvalReport:
    """Match detection files against ground-truth files image by image.

    gt_paths/det_paths map image ids to files. A ground-truth image with no
    detection file raises MissingImage unless allow_missing is set, in which
    case it counts as an image with zero detections.
    """
    images = []
    for image_id in sorted(gt_paths):
        gt_boxes = read_gt_file(gt_paths[image_id])
        det_path = det_paths.get(image_id)
        if det_path is None:
            if not allow_missing:
                raise MissingImage(f"no detection file for image {image_id!r}")
            dets: list[Quad] = []
        else:
            dets = read_detections_file(det_path)
        images.append((image_id, evaluate_image(dets, gt_boxes, iou_thr)))
    return aggregate(images)


def report_to_json(report: EvalReport) -> str:
    """Serialize a report with floats rounded to 6 decimal places."""
    payload = {
        "images": [
            {
                "id": image_id,
                "tp": m.tp,
                "fp": m.fp,
                "fn": m.fn,
                "pairs": [[d, g, round(iou, 6)] for d, g, iou in m.pairs],
            }
            for image_id, m in report.images
        ],
        "num_images": len(report.images),
        "tp": report.tp,
        "fp": report.fp,
        "fn": report.fn,
        "precision": round(report.precision, 6),
        "recall": round(report.recall, 6),
        "f_measure": round(report.f_measure, 6),
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def summary_line(report: EvalReport) -> str:
    return (f"P={report.precision:.4f} R={report.recall:.4f} "
            f"F={report.f_measure:.4f} "
            f"(tp={report.tp} fp={report.fp} fn={report.fn} "
            f"images={len(report.images)})")
