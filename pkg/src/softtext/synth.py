"""Deterministic synthetic scenes and score-map perturbation.

Stands in for a trained score-map generator so the rest of the pipeline can
be exercised end to end. All randomness comes from Philox (a counter-based
64-bit generator), keyed directly so corpora are reproducible bit for bit
across platforms; image i of a corpus uses key (seed XOR i).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import PlacementFailure
from .geometry import Quad, quad_gap
from .labelgen import (DEFAULT_SHRINK, AnnotatedScene, ScoreMap, TextBox,
                       gen_label_pair)
from .formats import save_pfm, write_annotations

MAX_PLACEMENT_ATTEMPTS = 10_000
_U64 = (1 << 64) - 1


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed & _U64))


@dataclass(frozen=True)
class SynthConfig:
    width: int = 640
    height: int = 640
    n_boxes: tuple[int, int] = (3, 6)
    box_w: tuple[float, float] = (64.0, 160.0)
    box_h: tuple[float, float] = (24.0, 48.0)
    rotation_deg: tuple[float, float] = (-25.0, 25.0)
    min_gap: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"bad image size {self.width}x{self.height}")
        for name in ("n_boxes", "box_w", "box_h", "rotation_deg"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"empty range {name}={lo}..{hi}")
        if self.n_boxes[0] < 0:
            raise ValueError("box count cannot be negative")
        if self.box_w[0] <= 0 or self.box_h[0] <= 0:
            raise ValueError("box dimensions must be positive")
        if self.min_gap < 0:
            raise ValueError("min_gap cannot be negative")


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float = 0.0
    blur_radius: int = 0
    salt_pepper: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma cannot be negative")
        if self.blur_radius < 0:
            raise ValueError("blur radius cannot be negative")
        if not 0.0 <= self.salt_pepper < 1.0:
            raise ValueError("salt-pepper fraction must be in [0, 1)")

    @property
    def is_identity(self) -> bool:
        return self.sigma == 0.0 and self.blur_radius == 0 and self.salt_pepper == 0.0


def synth_scene(cfg: SynthConfig) -> AnnotatedScene:
    """Rejection-sample rotated rectangles with a pairwise gap floor.

    Gaps are measured between the boxes as annotated (before any shrinking),
    so shrunk variants are at least as far apart. Raises PlacementFailure when
    the attempt budget runs out before the sampled count is reached.
    """
    rng = _rng(cfg.seed)
    count = int(rng.integers(cfg.n_boxes[0], cfg.n_boxes[1] + 1))
    quads: list[Quad] = []
    attempts = 0
    while len(quads) < count and attempts < MAX_PLACEMENT_ATTEMPTS:
        attempts += 1
        w = float(rng.uniform(cfg.box_w[0], cfg.box_w[1]))
        h = float(rng.uniform(cfg.box_h[0], cfg.box_h[1]))
        angle = float(rng.uniform(cfg.rotation_deg[0], cfg.rotation_deg[1]))
        rad = np.radians(angle)
        half_x = 0.5 * (w * abs(np.cos(rad)) + h * abs(np.sin(rad)))
        half_y = 0.5 * (w * abs(np.sin(rad)) + h * abs(np.cos(rad)))
        if 2 * half_x > cfg.width or 2 * half_y > cfg.height:
            continue
        cx = float(rng.uniform(half_x, cfg.width - half_x))
        cy = float(rng.uniform(half_y, cfg.height - half_y))
        quad = Quad.rotated_rect(cx, cy, w, h, angle)
        if all(quad_gap(quad, other) >= cfg.min_gap for other in quads):
            quads.append(quad)
    if len(quads) < count:
        raise PlacementFailure(count, len(quads))
    boxes = [TextBox(q, transcript=f"text{i}") for i, q in enumerate(quads)]
    return AnnotatedScene(cfg.width, cfg.height, boxes)


def perturb_map(m: ScoreMap, noise: NoiseSpec) -> ScoreMap:
    """Degrade a score map: box blur, additive Gaussian noise, salt-pepper.

    The result is folded back into [0, 1]: negative values reflect at zero
    (so background noise keeps its half-normal magnitude) and the top clamps
    at one. Salt-pepper pixels are set to exactly 0 or 1 after that.
    """
    out = np.asarray(m, dtype=np.float64)
    rng = _rng(noise.seed)
    if noise.blur_radius > 0:
        out = ndimage.uniform_filter(out, size=2 * noise.blur_radius + 1,
                                     mode="nearest")
    if noise.sigma > 0:
        out = out + rng.normal(0.0, noise.sigma, size=out.shape)
    out = np.minimum(np.abs(out), 1.0)
    if noise.salt_pepper > 0:
        flat = out.ravel()
        n = int(round(noise.salt_pepper * flat.size))
        idx = rng.choice(flat.size, size=n, replace=False)
        flat[idx] = rng.integers(0, 2, size=n).astype(np.float64)
    return out.astype(np.float32)


def make_corpus(cfg: SynthConfig, n_images: int, noise: NoiseSpec,
                out_dir: Path | str, shrink_r: float = DEFAULT_SHRINK,
                threads: int = 1) -> dict:
    """Write a corpus: annotations, clean label pairs, perturbed pairs, manifest.

    Layout under out_dir: images/NNNN.gt.txt, maps/NNNN.s0.pfm (no shrink),
    maps/NNNN.s1.pfm (shrunk), maps_noisy/NNNN.s{0,1}.pfm, manifest.json.
    Image i derives its scene key from cfg.seed XOR i and its noise key from
    noise.seed XOR i, so any image can be regenerated in isolation; files are
    written in index order regardless of thread count.
    """
    out = Path(out_dir)
    for sub in ("images", "maps", "maps_noisy"):
        (out / sub).mkdir(parents=True, exist_ok=True)

    manifest: dict = {
        "width": cfg.width,
        "height": cfg.height,
        "shrink_r": shrink_r,
        "config": asdict(cfg),
        "noise": asdict(noise),
        "images": [],
    }
    if threads <= 1:
        entries = [build_corpus_image(cfg, noise, shrink_r, i)
                   for i in range(n_images)]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            entries = list(pool.map(
                lambda i: build_corpus_image(cfg, noise, shrink_r, i),
                range(n_images)))
    for entry in entries:
        write_corpus_image(out, entry)
        manifest["images"].append(entry["manifest"])
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


def build_corpus_image(cfg: SynthConfig, noise: NoiseSpec, shrink_r: float,
                       index: int) -> dict:
    """Generate one corpus image's artifacts in memory (parallel-safe)."""
    image_id = f"{index:04d}"
    scene_seed = (cfg.seed ^ index) & _U64
    noise_seed = (noise.seed ^ index) & _U64
    scene = synth_scene(replace(cfg, seed=scene_seed))
    pair = gen_label_pair(scene, shrink_r)
    noisy_full = perturb_map(pair.map_full, replace(noise, seed=noise_seed))
    noisy_shrunk = perturb_map(pair.map_shrunk,
                               replace(noise, seed=(noise_seed ^ _U64) & _U64))
    return {
        "id": image_id,
        "scene": scene,
        "pair": pair,
        "noisy": (noisy_full, noisy_shrunk),
        "manifest": {
            "id": image_id,
            "scene_seed": scene_seed,
            "noise_seed": noise_seed,
            "annotations": f"images/{image_id}.gt.txt",
            "maps": {"full": f"maps/{image_id}.s0.pfm",
                     "shrunk": f"maps/{image_id}.s1.pfm"},
            "noisy_maps": {"full": f"maps_noisy/{image_id}.s0.pfm",
                           "shrunk": f"maps_noisy/{image_id}.s1.pfm"},
        },
    }


def write_corpus_image(out: Path, entry: dict) -> None:
    image_id = entry["id"]
    (out / "images" / f"{image_id}.gt.txt").write_text(
        write_annotations(entry["scene"].boxes), encoding="utf-8")
    save_pfm(out / "maps" / f"{image_id}.s0.pfm", entry["pair"].map_full)
    save_pfm(out / "maps" / f"{image_id}.s1.pfm", entry["pair"].map_shrunk)
    save_pfm(out / "maps_noisy" / f"{image_id}.s0.pfm", entry["noisy"][0])
    save_pfm(out / "maps_noisy" / f"{image_id}.s1.pfm", entry["noisy"][1])
