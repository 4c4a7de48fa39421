#!/usr/bin/env python3
"""Benchmark the compiled kernels against the numpy/scipy fallback.

Usage: python benchmarks/bench_kernels.py [--reps N]

Times the three hot kernels on realistic loads (a 640x640 corpus scene) and
verifies both backends return identical results while at it.
"""

import argparse
import time

import numpy as np

from softtext._kernels import pyfallback
from softtext.extraction import fuse_masks, threshold
from softtext.geometry import Quad
from softtext.labelgen import AnnotatedScene, TextBox, gen_label_pair
from softtext.synth import SynthConfig, synth_scene

try:
    from softtext._kernels import _core
except ImportError:
    _core = None


def timeit(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--reps", type=int, default=5)
    args = parser.parse_args()

    if _core is None:
        raise SystemExit("compiled core is not built; "
                         "run pip install -e . --no-build-isolation")

    scene = synth_scene(SynthConfig(seed=99))
    quads = np.stack([b.quad.pts for b in scene.boxes])
    pair = gen_label_pair(scene)
    mask = np.ascontiguousarray(threshold(pair.map_full, 0.25), dtype=np.uint8)

    # a merged two-word component with two seeds, the partition hot case
    two = AnnotatedScene(360, 96, [TextBox(Quad.rect(8.0, 8.0, 180.0, 72.0)),
                                   TextBox(Quad.rect(180.0, 8.0, 352.0, 72.0))])
    two_pair = gen_label_pair(two)
    omask = np.ascontiguousarray(threshold(two_pair.map_full, 0.25), np.uint8)
    from softtext.extraction import connected_components

    seeds = connected_components(
        fuse_masks(two_pair.map_full, two_pair.map_shrunk, 0.25))
    seed_window = np.where(omask.astype(bool), seeds.labels, 0).astype(np.int32)
    seed_ids = np.unique(seed_window[seed_window > 0]).astype(np.int32)

    cases = [
        ("render 640x640, %d boxes" % len(quads),
         lambda: _core.render_quads(quads, 640, 640),
         lambda: pyfallback.render_quads(quads, 640, 640)),
        ("label 640x640 mask",
         lambda: _core.label_components(mask, 8),
         lambda: pyfallback.label_components(mask, 8)),
        ("partition 360x96, %d seeds" % len(seed_ids),
         lambda: _core.partition_nearest_seed(omask, seed_window, seed_ids),
         lambda: pyfallback.partition_nearest_seed(omask.astype(bool),
                                                   seed_window, seed_ids)),
    ]

    print(f"{'kernel':<28} {'compiled':>12} {'fallback':>12} {'speedup':>9}")
    for name, compiled_fn, fallback_fn in cases:
        t_c, r_c = timeit(compiled_fn, args.reps)
        t_p, r_p = timeit(fallback_fn, args.reps)
        a = r_c[0] if isinstance(r_c, tuple) else r_c
        b = r_p[0] if isinstance(r_p, tuple) else r_p
        identical = np.array_equal(np.asarray(a), np.asarray(b))
        flag = "" if identical else "  RESULTS DIFFER!"
        print(f"{name:<28} {t_c * 1e3:>10.2f}ms {t_p * 1e3:>10.2f}ms "
              f"{t_p / t_c:>8.1f}x{flag}")


if __name__ == "__main__":
    main()
