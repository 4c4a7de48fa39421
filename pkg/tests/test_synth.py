"""Synthetic scene generation, perturbation, corpus layout."""

import json
from dataclasses import replace

import numpy as np
import pytest

from softtext.errors import PlacementFailure
from softtext.formats import write_annotations
from softtext.geometry import polygon_iou, quad_gap
from softtext.synth import (NoiseSpec, SynthConfig, make_corpus, perturb_map,
                            synth_scene)

FAST_CFG = SynthConfig(width=256, height=256, n_boxes=(2, 4),
                       box_w=(40.0, 90.0), box_h=(16.0, 30.0), seed=123)


class TestSynthScene:
    def test_zero_boxes(self):
        scene = synth_scene(replace(FAST_CFG, n_boxes=(0, 0)))
        assert scene.boxes == []

    def test_deterministic_bytes(self):
        a = synth_scene(FAST_CFG)
        b = synth_scene(FAST_CFG)
        assert write_annotations(a.boxes) == write_annotations(b.boxes)

    def test_different_seeds_differ(self):
        a = synth_scene(FAST_CFG)
        b = synth_scene(replace(FAST_CFG, seed=124))
        assert write_annotations(a.boxes) != write_annotations(b.boxes)

    def test_constraints_hold_across_many_scenes(self):
        # disjointness and the gap floor, re-validated post hoc
        for seed in range(200):
            scene = synth_scene(replace(FAST_CFG, seed=seed))
            quads = [b.quad for b in scene.boxes]
            for q in quads:
                x0, y0, x1, y1 = q.bounds
                assert x0 >= 0 and y0 >= 0
                assert x1 <= FAST_CFG.width and y1 <= FAST_CFG.height
            for i in range(len(quads)):
                for j in range(i + 1, len(quads)):
                    assert polygon_iou(quads[i], quads[j]) == 0.0
                    assert quad_gap(quads[i], quads[j]) >= FAST_CFG.min_gap

    def test_impossible_placement_reports_achieved(self):
        cramped = SynthConfig(width=64, height=64, n_boxes=(50, 50),
                              box_w=(30.0, 30.0), box_h=(20.0, 20.0),
                              min_gap=10.0, seed=1)
        with pytest.raises(PlacementFailure) as err:
            synth_scene(cramped)
        assert err.value.requested == 50
        assert 0 < err.value.achieved < 50

    def test_box_count_in_range(self):
        counts = {len(synth_scene(replace(FAST_CFG, seed=s)).boxes)
                  for s in range(30)}
        assert counts <= {2, 3, 4}
        assert len(counts) > 1


class TestPerturbMap:
    def test_identity_spec(self):
        m = np.random.default_rng(1).random((32, 32)).astype(np.float32)
        out = perturb_map(m, NoiseSpec())
        np.testing.assert_array_equal(out, m)

    def test_gaussian_on_zero_map_has_half_normal_mean(self):
        # folded N(0, 0.05) has mean 0.05 * sqrt(2/pi) = 0.0399
        m = np.zeros((400, 300), np.float32)
        out = perturb_map(m, NoiseSpec(sigma=0.05, seed=9))
        assert abs(float(np.abs(out).mean()) - 0.0399) < 0.005

    def test_values_stay_in_unit_range(self):
        rng = np.random.default_rng(3)
        m = rng.random((64, 64)).astype(np.float32)
        for spec in (NoiseSpec(sigma=0.5, seed=1),
                     NoiseSpec(sigma=0.1, blur_radius=2, salt_pepper=0.1, seed=2),
                     NoiseSpec(salt_pepper=0.5, seed=3)):
            out = perturb_map(m, spec)
            assert out.min() >= 0.0
            assert out.max() <= 1.0

    def test_salt_pepper_fraction(self):
        m = np.full((100, 100), 0.5, np.float32)
        out = perturb_map(m, NoiseSpec(salt_pepper=0.25, seed=4))
        flipped = np.count_nonzero(out != 0.5)
        assert flipped == 2500
        assert set(np.unique(out)) <= {np.float32(0.0), np.float32(0.5), np.float32(1.0)}

    def test_deterministic(self):
        m = np.random.default_rng(2).random((48, 48)).astype(np.float32)
        spec = NoiseSpec(sigma=0.07, blur_radius=1, salt_pepper=0.02, seed=11)
        np.testing.assert_array_equal(perturb_map(m, spec), perturb_map(m, spec))

    def test_blur_preserves_mean(self):
        m = np.random.default_rng(8).random((64, 64)).astype(np.float32)
        out = perturb_map(m, NoiseSpec(blur_radius=3, seed=0))
        assert abs(float(out.mean()) - float(m.mean())) < 0.02


class TestMakeCorpus:
    def test_file_layout(self, tmp_path):
        manifest = make_corpus(FAST_CFG, 1, NoiseSpec(), tmp_path / "c")
        base = tmp_path / "c"
        assert (base / "images" / "0000.gt.txt").is_file()
        for sub in ("maps", "maps_noisy"):
            for suffix in ("s0", "s1"):
                assert (base / sub / f"0000.{suffix}.pfm").is_file()
        assert (base / "manifest.json").is_file()
        assert len(manifest["images"]) == 1
        on_disk = json.loads((base / "manifest.json").read_text())
        assert on_disk["images"][0]["maps"]["full"] == "maps/0000.s0.pfm"

    def test_reproducible_corpus_bytes(self, tmp_path):
        noise = NoiseSpec(sigma=0.05, seed=5)
        make_corpus(FAST_CFG, 3, noise, tmp_path / "a")
        make_corpus(FAST_CFG, 3, noise, tmp_path / "b")
        files_a = sorted((tmp_path / "a").rglob("*.*"))
        files_b = sorted((tmp_path / "b").rglob("*.*"))
        assert [p.name for p in files_a] == [p.name for p in files_b]
        for pa, pb in zip(files_a, files_b):
            assert pa.read_bytes() == pb.read_bytes(), pa.name

    def test_threaded_corpus_identical(self, tmp_path):
        noise = NoiseSpec(sigma=0.03, seed=6)
        make_corpus(FAST_CFG, 4, noise, tmp_path / "a", threads=1)
        make_corpus(FAST_CFG, 4, noise, tmp_path / "b", threads=4)
        for pa in sorted((tmp_path / "a").rglob("*.*")):
            pb = tmp_path / "b" / pa.relative_to(tmp_path / "a")
            assert pa.read_bytes() == pb.read_bytes(), pa.name


class TestValidation:
    def test_bad_ranges_rejected(self):
        with pytest.raises(ValueError):
            SynthConfig(n_boxes=(5, 2))
        with pytest.raises(ValueError):
            SynthConfig(min_gap=-1)
        with pytest.raises(ValueError):
            NoiseSpec(salt_pepper=1.0)
        with pytest.raises(ValueError):
            NoiseSpec(sigma=-0.1)
