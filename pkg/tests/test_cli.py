"""CLI subcommands: wiring, exit codes, diagnostics, figures."""

import json

import numpy as np
import pytest
from PIL import Image

from softtext.cli import main
from softtext.formats import load_pfm, save_pfm, write_pfm


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    base = tmp_path_factory.mktemp("corpus")
    assert run("synth", base, "--images", 3, "--seed", 11,
               "--width", 256, "--height", 192, "--boxes", "2:3",
               "--box-w", "50:90", "--box-h", "18:30") == 0
    return base


class TestSynth(object):
    def test_layout(self, corpus):
        assert (corpus / "manifest.json").is_file()
        assert len(list((corpus / "images").glob("*.gt.txt"))) == 3
        assert len(list((corpus / "maps").glob("*.pfm"))) == 6
        assert len(list((corpus / "maps_noisy").glob("*.pfm"))) == 6


class TestGenLabels:
    def test_renders_pairs_from_manifest_size(self, corpus, tmp_path):
        out = tmp_path / "labels"
        assert run("gen-labels", corpus / "images", out) == 0
        assert len(list(out.glob("*.s0.pfm"))) == 3
        m = load_pfm(out / "0000.s0.pfm")
        assert m.shape == (192, 256)
        assert 0.0 <= m.min() and m.max() <= 1.0

    def test_explicit_size_flag(self, corpus, tmp_path):
        out = tmp_path / "labels"
        assert run("gen-labels", corpus / "images", out, "--size", "300x200") == 0
        assert load_pfm(out / "0001.s0.pfm").shape == (200, 300)

    def test_size_unknown_fails(self, tmp_path):
        gt = tmp_path / "gt"
        gt.mkdir()
        (gt / "a.gt.txt").write_text("0,0,10,0,10,4,0,4,w\n")
        assert run("gen-labels", gt, tmp_path / "out") == 1

    def test_malformed_annotation_names_file_and_line(self, tmp_path, capsys):
        gt = tmp_path / "gt"
        gt.mkdir()
        (gt / "ok.gt.txt").write_text("0,0,10,0,10,4,0,4,w\n")
        (gt / "bad.gt.txt").write_text("0,0,10,0,10,4,0,4,w\n1,2,3\n")
        code = run("gen-labels", gt, tmp_path / "out", "--size", "64x32")
        err = capsys.readouterr().err
        assert code == 1
        assert "bad.gt.txt" in err and "line 2" in err
        # the healthy file was still processed
        assert (tmp_path / "out" / "ok.s0.pfm").is_file()

    def test_empty_dir_warns_and_succeeds(self, tmp_path, capsys):
        gt = tmp_path / "gt"
        gt.mkdir()
        assert run("gen-labels", gt, tmp_path / "out", "--size", "64x32") == 0
        assert "warning" in capsys.readouterr().err


class TestExtractEvaluate:
    def test_round_trip_scores_perfectly(self, corpus, tmp_path, capsys):
        dets = tmp_path / "dets"
        assert run("extract", corpus / "maps", dets) == 0
        report_path = tmp_path / "report.json"
        assert run("evaluate", dets, corpus / "images",
                   "--report", report_path) == 0
        out = capsys.readouterr().out
        assert "F=1.0000" in out
        report = json.loads(report_path.read_text())
        assert report["f_measure"] == 1.0
        assert report["num_images"] == 3

    def test_all_zero_maps_give_empty_detections(self, tmp_path):
        maps = tmp_path / "maps"
        maps.mkdir()
        zero = np.zeros((32, 32), np.float32)
        save_pfm(maps / "0000.s0.pfm", zero)
        save_pfm(maps / "0000.s1.pfm", zero)
        dets = tmp_path / "dets"
        assert run("extract", maps, dets) == 0
        assert (dets / "0000.txt").read_text() == ""

    def test_dimension_mismatch_reported_run_continues(self, corpus, tmp_path, capsys):
        maps = tmp_path / "maps"
        maps.mkdir()
        zero = np.zeros((32, 32), np.float32)
        save_pfm(maps / "0000.s0.pfm", zero)
        save_pfm(maps / "0000.s1.pfm", np.zeros((16, 32), np.float32))
        save_pfm(maps / "0001.s0.pfm", zero)
        save_pfm(maps / "0001.s1.pfm", zero)
        code = run("extract", maps, tmp_path / "dets")
        assert code == 1
        assert "0000" in capsys.readouterr().err
        assert (tmp_path / "dets" / "0001.txt").is_file()
        assert not (tmp_path / "dets" / "0000.txt").exists()

    def test_missing_pair_member_reported(self, tmp_path, capsys):
        maps = tmp_path / "maps"
        maps.mkdir()
        save_pfm(maps / "0000.s0.pfm", np.zeros((8, 8), np.float32))
        assert run("extract", maps, tmp_path / "dets") == 1
        assert "missing pair member" in capsys.readouterr().err

    def test_missing_detection_file(self, corpus, tmp_path, capsys):
        dets = tmp_path / "dets"
        dets.mkdir()
        assert run("evaluate", dets, corpus / "images") == 1
        assert "no detection file" in capsys.readouterr().err
        assert run("evaluate", dets, corpus / "images", "--allow-missing") == 0


class TestLossCommand:
    def test_json_record(self, tmp_path, capsys):
        rng = np.random.default_rng(3)
        paths = []
        arrays = []
        for name in ("p0", "p1", "g0", "g1"):
            arr = rng.random((16, 16)).astype(np.float32)
            path = tmp_path / f"{name}.pfm"
            path.write_bytes(write_pfm(arr))
            paths.append(path)
            arrays.append(arr)
        scores = tmp_path / "scores.json"
        scores.write_text(json.dumps({"on_real": [0.9], "on_fake": [0.5]}))
        assert run("loss", *paths, "--scores", scores) == 0
        record = json.loads(capsys.readouterr().out)
        pred = np.concatenate([arrays[0].ravel(), arrays[1].ravel()]).astype(np.float64)
        gt = np.concatenate([arrays[2].ravel(), arrays[3].ravel()]).astype(np.float64)
        expected_l2 = float(np.linalg.norm(gt - pred) / np.sqrt(pred.size))
        assert record["l2"] == pytest.approx(expected_l2, abs=1e-12)
        assert record["g_adv"] == pytest.approx(np.log(2), abs=1e-9)
        assert record["d_loss"] == pytest.approx(-(np.log(0.9) + np.log(0.5)), abs=1e-9)
        assert record["combined"] == pytest.approx(
            record["g_adv"] + 100.0 * record["l2"], abs=1e-9)

    def test_without_scores(self, tmp_path, capsys):
        zero = tmp_path / "z.pfm"
        zero.write_bytes(write_pfm(np.zeros((4, 4), np.float32)))
        assert run("loss", zero, zero, zero, zero) == 0
        record = json.loads(capsys.readouterr().out)
        assert record["l2"] == 0.0
        assert record["g_adv"] is None and record["combined"] is None


class TestRender:
    def test_zero_map_is_black(self, tmp_path):
        pfm = tmp_path / "m.pfm"
        save_pfm(pfm, np.zeros((24, 32), np.float32))
        out = tmp_path / "m.png"
        assert run("render", out, "--map", pfm) == 0
        img = np.asarray(Image.open(out).convert("L"))
        assert img.shape == (24, 32)
        assert not img.any()

    def test_heatmap_peak_near_box_center(self, corpus, tmp_path):
        from softtext.formats import read_gt_file
        from softtext.labelgen import AnnotatedScene, TextBox
        from softtext.geometry import Quad
        from softtext.labelgen import render_score_map

        scene = AnnotatedScene(64, 48, [TextBox(Quad.rect(10, 10, 41, 33))])
        pfm = tmp_path / "m.pfm"
        save_pfm(pfm, render_score_map(scene))
        out = tmp_path / "m.png"
        assert run("render", out, "--map", pfm) == 0
        img = np.asarray(Image.open(out).convert("L"))
        peak = np.unravel_index(img.argmax(), img.shape)
        assert abs(peak[0] - 21.5) <= 2 and abs(peak[1] - 25.5) <= 2

    def test_overlay_outlines_present(self, tmp_path):
        gt = tmp_path / "gt.txt"
        gt.write_text("8,8,40,8,40,24,8,24,w\n")
        det = tmp_path / "det.txt"
        det.write_text("10,10,38,10,38,22,10,22\n")
        out = tmp_path / "o.png"
        assert run("render", out, "--gt", gt, "--det", det, "--size", "64x32") == 0
        img = np.asarray(Image.open(out))
        green = (img[:, :, 1] > 200) & (img[:, :, 0] < 100)
        red = (img[:, :, 0] > 200) & (img[:, :, 1] < 100)
        assert green[8, 8:41].all()
        assert red[10, 10:39].all()

    def test_overlay_svg(self, tmp_path):
        gt = tmp_path / "gt.txt"
        gt.write_text("8,8,40,8,40,24,8,24,w\n")
        out = tmp_path / "o.svg"
        assert run("render", out, "--gt", gt, "--size", "64x32") == 0
        text = out.read_text()
        assert "<svg" in text and "polygon" in text

    def test_nothing_to_render(self, tmp_path):
        assert run("render", tmp_path / "x.png") == 1


class TestConfigFile:
    def test_file_values_used_flags_win(self, tmp_path, capsys):
        cfg = tmp_path / "run.conf"
        cfg.write_text("images = 2\nseed = 9\nwidth = 128\nheight = 96\n"
                       "boxes = 1:2\nbox-w = 40:60\nbox-h = 16:24\n")
        out = tmp_path / "c"
        assert run("synth", out, "--config", cfg, "--images", 1) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["images"]) == 1  # flag beat the file
        assert manifest["width"] == 128     # file value applied

    def test_bad_config_line(self, tmp_path):
        cfg = tmp_path / "run.conf"
        cfg.write_text("just a line\n")
        assert run("synth", tmp_path / "c", "--config", cfg) == 1


class TestUsageErrors:
    def test_unknown_flag_exits_one(self, capsys):
        with pytest.raises(SystemExit) as err:
            run("synth", "x", "--nope")
        assert err.value.code == 1
