"""Command-line batch driver.

Subcommands: synth, gen-labels, extract, evaluate, loss, render. Every run is
deterministic given its inputs and seeds: per-image work may fan out over a
thread pool (--threads, default from SOFTTEXT_THREADS), but results are
written in input order so output bytes never depend on scheduling.

Exit codes: 0 success, 1 validation or parse failure, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import formats, losses, synth
from .errors import SoftTextError
from .evalproto import evaluate_corpus, report_to_json, summary_line
from .extraction import ExtractionParams, extract_boxes
from .labelgen import DEFAULT_SHRINK, ScoreMapPair, gen_label_pair


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("SOFTTEXT_THREADS", "1")))
    except ValueError:
        return 1


def load_config_file(path: Path | str) -> dict[str, str]:
    """Flat key = value file; # starts a comment; keys match long flag names."""
    values: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SoftTextError(f"{path}: line {line_no}: expected key = value")
        key, _, val = line.partition("=")
        values[key.strip().replace("-", "_")] = val.strip().strip("\"'")
    return values


class _Options:
    """Flag values with config-file fallback; explicit flags win."""

    def __init__(self, args):
        self.args = args
        self.file_values = {}
        if getattr(args, "config", None):
            self.file_values = load_config_file(args.config)

    def get(self, key, cast, default):
        val = getattr(self.args, key, None)
        if val is not None:
            return val
        if key in self.file_values:
            raw = self.file_values[key]
            if cast is bool:
                return raw.lower() in ("1", "true", "yes", "on")
            return cast(raw)
        return default

    def get_range(self, key, cast, default):
        val = self.get(key, str, None)
        if val is None:
            return default
        if isinstance(val, tuple):
            return val
        parts = str(val).split(":")
        if len(parts) == 1:
            return (cast(parts[0]), cast(parts[0]))
        if len(parts) == 2:
            return (cast(parts[0]), cast(parts[1]))
        raise SoftTextError(f"bad range {val!r} for --{key.replace('_', '-')}; use LO:HI")


def _parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise SoftTextError(f"bad size {text!r}; use WIDTHxHEIGHT") from None


def _map_ordered(worker, jobs, threads: int) -> list:
    if threads <= 1:
        return [worker(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, jobs))


def _manifest_size(gt_dir: Path) -> tuple[int, int] | None:
    for candidate in (gt_dir / "manifest.json", gt_dir.parent / "manifest.json"):
        if candidate.is_file():
            data = json.loads(candidate.read_text(encoding="utf-8"))
            return int(data["width"]), int(data["height"])
    return None


# ---------------------------------------------------------------- gen-labels

def cmd_gen_labels(args) -> int:
    opt = _Options(args)
    gt_dir = Path(args.gt_dir)
    out_dir = Path(args.out_dir)
    shrink = opt.get("shrink", float, DEFAULT_SHRINK)
    threads = opt.get("threads", int, _default_threads())
    size_text = opt.get("size", str, None)
    size = _parse_size(size_text) if size_text else _manifest_size(gt_dir)
    if size is None:
        raise SoftTextError(
            "image size unknown: pass --size WxH or keep a manifest.json beside the annotations")
    width, height = size

    gt_files = sorted(gt_dir.glob("*.gt.txt"))
    if not gt_files:
        print(f"warning: no *.gt.txt files under {gt_dir}", file=sys.stderr)
        return 0
    out_dir.mkdir(parents=True, exist_ok=True)

    def worker(path: Path):
        image_id = path.name[:-len(".gt.txt")]
        try:
            scene = formats.read_scene_file(path, width, height)
            pair = gen_label_pair(scene, shrink)
            return (image_id, formats.write_pfm(pair.map_full),
                    formats.write_pfm(pair.map_shrunk), None)
        except SoftTextError as exc:
            return (image_id, None, None, f"{path}: {exc}")

    failures = 0
    for image_id, full_bytes, shrunk_bytes, err in _map_ordered(worker, gt_files, threads):
        if err:
            print(err, file=sys.stderr)
            failures += 1
            continue
        (out_dir / f"{image_id}.s0.pfm").write_bytes(full_bytes)
        (out_dir / f"{image_id}.s1.pfm").write_bytes(shrunk_bytes)
    return 1 if failures else 0


# ------------------------------------------------------------------- extract

def cmd_extract(args) -> int:
    opt = _Options(args)
    maps_dir = Path(args.maps_dir)
    out_dir = Path(args.out_dir)
    params = ExtractionParams(
        t=opt.get("t", float, 0.25),
        connectivity=opt.get("connectivity", int, 8),
        min_component_px=opt.get("min_px", int, 10),
        shrink_r=opt.get("shrink", float, DEFAULT_SHRINK),
        t_fused=opt.get("t_fused", float, None),
    )
    threads = opt.get("threads", int, _default_threads())

    full_files = sorted(maps_dir.glob("*.s0.pfm"))
    if not full_files:
        print(f"warning: no *.s0.pfm files under {maps_dir}", file=sys.stderr)
        return 0
    out_dir.mkdir(parents=True, exist_ok=True)

    def worker(path: Path):
        image_id = path.name[:-len(".s0.pfm")]
        shrunk_path = path.with_name(f"{image_id}.s1.pfm")
        if not shrunk_path.is_file():
            return image_id, None, f"{path}: missing pair member {shrunk_path.name}"
        try:
            pair = ScoreMapPair(formats.load_pfm(path), formats.load_pfm(shrunk_path),
                                shrink_r=params.shrink_r)
            boxes = extract_boxes(pair, params)
            return image_id, formats.write_detections(boxes), None
        except SoftTextError as exc:
            return image_id, None, f"{path}: {exc}"

    failures = 0
    for image_id, text, err in _map_ordered(worker, full_files, threads):
        if err:
            print(err, file=sys.stderr)
            failures += 1
            continue
        (out_dir / f"{image_id}.txt").write_text(text, encoding="utf-8")
    return 1 if failures else 0


# ------------------------------------------------------------------ evaluate

def cmd_evaluate(args) -> int:
    opt = _Options(args)
    det_dir = Path(args.det_dir)
    gt_dir = Path(args.gt_dir)
    iou_thr = opt.get("iou", float, 0.5)

    gt_paths = {p.name[:-len(".gt.txt")]: p for p in sorted(gt_dir.glob("*.gt.txt"))}
    det_paths = {image_id: det_dir / f"{image_id}.txt" for image_id in gt_paths
                 if (det_dir / f"{image_id}.txt").is_file()}
    if not gt_paths:
        print(f"warning: empty corpus, no *.gt.txt under {gt_dir}", file=sys.stderr)
    report = evaluate_corpus(gt_paths, det_paths, iou_thr=iou_thr,
                             allow_missing=args.allow_missing)
    print(summary_line(report))
    if args.report:
        Path(args.report).write_text(report_to_json(report), encoding="utf-8")
    return 0


# --------------------------------------------------------------------- synth

def cmd_synth(args) -> int:
    opt = _Options(args)
    cfg = synth.SynthConfig(
        width=opt.get("width", int, 640),
        height=opt.get("height", int, 640),
        n_boxes=opt.get_range("boxes", int, (3, 6)),
        box_w=opt.get_range("box_w", float, (64.0, 160.0)),
        box_h=opt.get_range("box_h", float, (24.0, 48.0)),
        rotation_deg=opt.get_range("rot", float, (-25.0, 25.0)),
        min_gap=opt.get("gap", float, 3.0),
        seed=opt.get("seed", int, 0),
    )
    noise = synth.NoiseSpec(
        sigma=opt.get("noise_sigma", float, 0.0),
        blur_radius=opt.get("noise_blur", int, 0),
        salt_pepper=opt.get("noise_sp", float, 0.0),
        seed=opt.get("noise_seed", int, cfg.seed),
    )
    n_images = opt.get("images", int, 10)
    threads = opt.get("threads", int, _default_threads())
    manifest = synth.make_corpus(cfg, n_images, noise, Path(args.out_dir),
                                 shrink_r=opt.get("shrink", float, DEFAULT_SHRINK),
                                 threads=threads)
    print(f"wrote {len(manifest['images'])} images under {args.out_dir}")
    return 0


# ---------------------------------------------------------------------- loss

def cmd_loss(args) -> int:
    pred = [formats.load_pfm(args.pred_full), formats.load_pfm(args.pred_shrunk)]
    gt = [formats.load_pfm(args.gt_full), formats.load_pfm(args.gt_shrunk)]
    pred_flat = np.concatenate([m.ravel() for m in pred])
    gt_flat = np.concatenate([m.ravel() for m in gt])
    l2_weight = args.l2_weight if args.l2_weight is not None else 100.0
    record: dict = {
        "l2": losses.l2_term(pred_flat, gt_flat, normalize=not args.raw_l2),
        "l2_weight": l2_weight,
        "g_adv": None,
        "d_loss": None,
        "combined": None,
    }
    if args.scores:
        scores = json.loads(Path(args.scores).read_text(encoding="utf-8"))
        on_fake = scores.get("on_fake")
        on_real = scores.get("on_real")
        if on_fake:
            record["g_adv"] = losses.cgan_g_loss(
                on_fake, non_saturating=not args.literal_adv)
            record["combined"] = losses.combined_objective(
                record["g_adv"], record["l2"], losses.LossParams(l2_weight))
        if on_fake and on_real:
            record["d_loss"] = losses.cgan_d_loss(on_real, on_fake)
    print(json.dumps(record, sort_keys=True))
    return 0


# -------------------------------------------------------------------- render

def _render_heatmap(m: np.ndarray):
    from PIL import Image

    gray = np.clip(np.asarray(m, dtype=np.float64), 0.0, 1.0)
    return Image.fromarray((gray * 255.0).round().astype(np.uint8), mode="L")


def _draw_overlay(image, gt_quads, det_quads):
    from PIL import ImageDraw

    draw = ImageDraw.Draw(image)
    for q in gt_quads:
        draw.polygon([tuple(p) for p in q.pts], outline=(0, 255, 0))
    for q in det_quads:
        draw.polygon([tuple(p) for p in q.pts], outline=(255, 64, 64))
    return image


def _overlay_svg(width, height, gt_quads, det_quads) -> str:
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" viewBox="0 0 {width} {height}">',
             f'<rect width="{width}" height="{height}" fill="black"/>']
    for quads, color in ((gt_quads, "#00ff00"), (det_quads, "#ff4040")):
        for q in quads:
            pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in q.pts)
            parts.append(f'<polygon points="{pts}" fill="none" stroke="{color}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_render(args) -> int:
    out_path = Path(args.out)
    gt_quads = [b.quad for b in formats.read_gt_file(args.gt)] if args.gt else []
    det_quads = formats.read_detections_file(args.det) if args.det else []
    score_map = formats.load_pfm(args.map) if args.map else None

    if score_map is None and not (gt_quads or det_quads):
        raise SoftTextError("nothing to render: pass --map and/or --gt/--det")

    if out_path.suffix.lower() == ".svg":
        if score_map is not None:
            raise SoftTextError("SVG output supports box overlays only; "
                                "write maps to .png")
        if not args.size:
            raise SoftTextError("--size WxH is required for overlay rendering")
        width, height = _parse_size(args.size)
        out_path.write_text(_overlay_svg(width, height, gt_quads, det_quads),
                            encoding="utf-8")
        return 0

    if score_map is not None:
        image = _render_heatmap(score_map).convert("RGB")
    else:
        if not args.size:
            raise SoftTextError("--size WxH is required for overlay rendering")
        width, height = _parse_size(args.size)
        from PIL import Image

        image = Image.new("RGB", (width, height))
    if gt_quads or det_quads:
        image = _draw_overlay(image, gt_quads, det_quads)
    image.save(out_path, format="PNG")
    return 0


# ---------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="softtext",
                     description="Soft text score maps: synthesize, render labels, "
                                 "extract boxes, evaluate.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key = value defaults file (flags win)")
        p.add_argument("--threads", type=int,
                       help="worker threads (default $SOFTTEXT_THREADS or 1); "
                            "never changes output bytes")

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("out_dir")
    p.add_argument("--images", type=int, help="number of images (default 10)")
    p.add_argument("--seed", type=int, help="corpus seed (default 0)")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--boxes", help="box count range LO:HI (default 3:6)")
    p.add_argument("--box-w", dest="box_w", help="box width range LO:HI")
    p.add_argument("--box-h", dest="box_h", help="box height range LO:HI")
    p.add_argument("--rot", help="rotation range LO:HI degrees")
    p.add_argument("--gap", type=float, help="minimum box gap in px (default 3)")
    p.add_argument("--shrink", type=float, help="shrink fraction (default 0.2)")
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float,
                   help="Gaussian sigma for the noisy map copies")
    p.add_argument("--noise-blur", dest="noise_blur", type=int,
                   help="box blur radius in px")
    p.add_argument("--noise-sp", dest="noise_sp", type=float,
                   help="salt-pepper pixel fraction")
    p.add_argument("--noise-seed", dest="noise_seed", type=int)
    add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("gen-labels", help="render score-map pairs from annotations")
    p.add_argument("gt_dir")
    p.add_argument("out_dir")
    p.add_argument("--shrink", type=float, help="shrink fraction (default 0.2)")
    p.add_argument("--size", help="image size WxH (default: from manifest.json)")
    add_common(p)
    p.set_defaults(func=cmd_gen_labels)

    p = sub.add_parser("extract", help="extract text boxes from score-map pairs")
    p.add_argument("maps_dir")
    p.add_argument("out_dir")
    p.add_argument("--t", type=float, help="score threshold (default 0.25)")
    p.add_argument("--t-fused", dest="t_fused", type=float,
                   help="threshold for the summed map (default: same as --t)")
    p.add_argument("--connectivity", type=int, choices=(4, 8))
    p.add_argument("--min-px", dest="min_px", type=int,
                   help="drop boxes under this many pixels (default 10)")
    p.add_argument("--shrink", type=float,
                   help="shrink fraction the pairs were rendered with")
    add_common(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("evaluate", help="score detections against ground truth")
    p.add_argument("det_dir")
    p.add_argument("gt_dir")
    p.add_argument("--iou", type=float, help="IoU threshold (default 0.5)")
    p.add_argument("--allow-missing", action="store_true",
                   help="treat images without a detection file as empty")
    p.add_argument("--report", help="write the JSON report to this path")
    add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("loss", help="loss record for a predicted pair vs ground truth")
    p.add_argument("pred_full")
    p.add_argument("pred_shrunk")
    p.add_argument("gt_full")
    p.add_argument("gt_shrunk")
    p.add_argument("--scores", help="JSON file with on_real/on_fake probabilities")
    p.add_argument("--l2-weight", dest="l2_weight", type=float,
                   help="weight of the L2 term (default 100)")
    p.add_argument("--literal-adv", dest="literal_adv", action="store_true",
                   help="use mean log(1 - D(fake)) instead of -mean log D(fake)")
    p.add_argument("--raw-l2", dest="raw_l2", action="store_true",
                   help="report the unnormalized L2 norm")
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("render", help="write a heatmap or box-overlay figure")
    p.add_argument("out", help="output image path (.png, or .svg for overlays)")
    p.add_argument("--map", help="score map PFM to show as a grayscale heatmap")
    p.add_argument("--gt", help="ground-truth file to outline")
    p.add_argument("--det", help="detection file to outline")
    p.add_argument("--size", help="canvas WxH when no --map is given")
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SoftTextError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit:
        raise
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
