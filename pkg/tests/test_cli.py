import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

import pansphere as ps
from pansphere import io as psio
from pansphere.cli import main
from conftest import bandlimited


def sha(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@pytest.fixture
def workdir(tmp_path, rng):
    img = bandlimited(64, 3)
    psio.write_image(tmp_path / "pano.png", img)
    depth_values = np.clip(bandlimited(64).astype(np.float64) * 8.0 + 0.5, 0.5, 9.0)
    depth = ps.DepthMap(depth_values, np.ones_like(depth_values, bool), units="metric")
    psio.write_depth(tmp_path / "depth.pfm", depth)
    return tmp_path


class TestWarpCommand:
    def test_identity_nearest_is_pixel_identical(self, workdir):
        out = workdir / "warped.png"
        rc = main(["warp", "--input", str(workdir / "pano.png"), "--output", str(out),
                   "--rotate-deg", "0", "--zoom", "1", "--interp", "nearest"])
        assert rc == 0
        assert sha(out) == sha(workdir / "pano.png")

    def test_thirty_degrees_and_full_zoom_accepted(self, workdir):
        rc = main(["warp", "--input", str(workdir / "pano.png"),
                   "--output", str(workdir / "w30.png"), "--rotate-deg", "30"])
        assert rc == 0
        rc = main(["warp", "--input", str(workdir / "pano.png"),
                   "--output", str(workdir / "z4.png"), "--zoom", "4.0"])
        assert rc == 0

    def test_depth_warp_keeps_format(self, workdir):
        out = workdir / "wd.pfm"
        rc = main(["warp", "--input", str(workdir / "depth.pfm"), "--output", str(out),
                   "--rotate-deg", "10"])
        assert rc == 0
        assert psio.read_depth(out).shape == (64, 128)

    def test_manifest_written_and_idempotent(self, workdir):
        out = workdir / "warped2.png"
        argv = ["warp", "--input", str(workdir / "pano.png"), "--output", str(out),
                "--rotate-deg", "12", "--zoom", "1.2"]
        assert main(argv) == 0
        man1 = json.loads((workdir / "warped2.png.manifest.json").read_text())
        digest1 = sha(out)
        assert main(argv) == 0
        man2 = json.loads((workdir / "warped2.png.manifest.json").read_text())
        assert sha(out) == digest1
        assert man1 == man2
        assert man1["tool"] == "pansphere" and man1["command"] == argv
        assert str(out) in man1["outputs"]

    def test_bad_aspect_is_domain_error(self, tmp_path, rng, capsys):
        psio.write_image(tmp_path / "bad.png", rng.random((50, 70, 3)))
        rc = main(["warp", "--input", str(tmp_path / "bad.png"),
                   "--output", str(tmp_path / "o.png")])
        assert rc == 2
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "InvalidErpShape"

    def test_missing_input_exits_one(self, tmp_path, capsys):
        rc = main(["warp", "--input", str(tmp_path / "nope.png"),
                   "--output", str(tmp_path / "o.png")])
        assert rc == 1

    def test_usage_error_exits_one(self, capsys):
        assert main(["warp", "--frobnicate"]) == 1


class TestReprojectCommand:
    def test_tangent_produces_18_files(self, workdir):
        out = workdir / "tp"
        rc = main(["reproject", "--from", "erp", "--to", "tp",
                   "--input", str(workdir / "pano.png"), "--output-dir", str(out)])
        assert rc == 0
        assert len(list(out.glob("tangent_*.png"))) == 18

    def test_cubemap_at_504(self, tmp_path):
        psio.write_image(tmp_path / "big.png", bandlimited(504, 3))
        out = tmp_path / "cp"
        rc = main(["reproject", "--from", "erp", "--to", "cp",
                   "--input", str(tmp_path / "big.png"), "--output-dir", str(out)])
        assert rc == 0
        face = psio.read_image(out / "cube_01.png")
        assert face.shape == (252, 252, 3)

    def test_hs_round_trip_bit_identical(self, workdir):
        hs_dir = workdir / "hs"
        back_dir = workdir / "back"
        assert main(["reproject", "--from", "erp", "--to", "hs",
                     "--input", str(workdir / "pano.png"), "--output-dir", str(hs_dir)]) == 0
        assert main(["reproject", "--from", "hs", "--to", "erp",
                     "--input", str(hs_dir), "--output-dir", str(back_dir)]) == 0
        assert sha(back_dir / "erp.png") == sha(workdir / "pano.png")

    def test_incomplete_patchset_exits_two(self, workdir, capsys):
        hs_dir = workdir / "hs2"
        assert main(["reproject", "--from", "erp", "--to", "hs",
                     "--input", str(workdir / "pano.png"), "--output-dir", str(hs_dir)]) == 0
        (hs_dir / "hslice_02.png").unlink()
        rc = main(["reproject", "--from", "hs", "--to", "erp",
                   "--input", str(hs_dir), "--output-dir", str(workdir / "back2")])
        assert rc == 2


class TestEvalCommand:
    def test_perfect_prediction(self, workdir, capsys):
        rc = main(["eval", "--pred", str(workdir / "depth.pfm"),
                   "--gt", str(workdir / "depth.pfm"), "--max-depth", "10"])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["abs_rel"] == 0.0 and doc["rmse"] == 0.0 and doc["delta1"] == 1.0
        assert doc["manifest"]["version"]

    def test_hand_solved_fixture(self, tmp_path, capsys):
        psio.write_pfm(tmp_path / "p.pfm", np.array([[1, 2, 3]], dtype=np.float32))
        psio.write_pfm(tmp_path / "g.pfm", np.array([[1, 2, 5]], dtype=np.float32))
        rc = main(["eval", "--pred", str(tmp_path / "p.pfm"), "--gt", str(tmp_path / "g.pfm")])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["abs_rel"] == pytest.approx(0.133333, abs=1e-6)
        assert doc["rmse"] == pytest.approx(1.1547, abs=1e-4)
        assert doc["delta1"] == pytest.approx(2 / 3, abs=1e-6)

    def test_output_file_and_sidecar_manifest(self, workdir):
        out = workdir / "report.json"
        rc = main(["eval", "--pred", str(workdir / "depth.pfm"),
                   "--gt", str(workdir / "depth.pfm"), "--output", str(out)])
        assert rc == 0
        assert json.loads(out.read_text())["delta3"] == 1.0
        assert (workdir / "report.json.manifest.json").exists()


class TestSweepCommand:
    def make_oracle_dir(self, workdir, gt):
        pred_dir = workdir / "preds"
        pred_dir.mkdir()
        for cell in ps.sweep_cells():
            warped = ps.warp_depth_target(gt, cell.spec())
            psio.write_depth(pred_dir / f"{cell.transform}_{cell.level:g}.pfm", warped)
        return pred_dir

    def test_oracle_dir_sweep(self, workdir):
        values = np.clip(bandlimited(64).astype(np.float64), 0.01, 1.0)
        gt = ps.DepthMap(values, np.ones_like(values, bool), units="normalized")
        psio.write_depth(workdir / "gt.pfm", gt)
        pred_dir = self.make_oracle_dir(workdir, gt)
        out = workdir / "sweep.csv"
        rc = main(["sweep", "--pred-dir", str(pred_dir), "--image", str(workdir / "pano.png"),
                   "--gt", str(workdir / "gt.pfm"), "--output", str(out)])
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "transform,level,abs_rel,rmse,delta1,delta2,delta3,valid_pixels"
        assert len(lines) == 1 + 21
        assert sum(l.startswith("rotation,") for l in lines[1:]) == 11
        assert sum(l.startswith("zoom,") for l in lines[1:]) == 10
        assert any(l.startswith("rotation,0,") for l in lines[1:])
        assert any(l.startswith("zoom,0.4,") for l in lines[1:])
        for line in lines[1:]:
            rmse = float(line.split(",")[3])
            assert rmse < 0.02

    def test_missing_cells_reported(self, workdir, capsys):
        values = np.clip(bandlimited(64).astype(np.float64), 0.01, 1.0)
        gt = ps.DepthMap(values, np.ones_like(values, bool), units="normalized")
        psio.write_depth(workdir / "gt.pfm", gt)
        pred_dir = self.make_oracle_dir(workdir, gt)
        (pred_dir / "zoom_4.pfm").unlink()
        out = workdir / "sweep.csv"
        rc = main(["sweep", "--pred-dir", str(pred_dir), "--image", str(workdir / "pano.png"),
                   "--gt", str(workdir / "gt.pfm"), "--output", str(out)])
        assert rc == 1
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 1 + 20
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "PredictorFailure"

    def test_pred_cmd_protocol(self, workdir):
        # a trivial external predictor: constant 0.5 PFM of the input's size
        script = workdir / "predict.py"
        script.write_text(
            "import sys\n"
            "import numpy as np\n"
            "from pansphere import io\n"
            "img = io.read_image(sys.argv[1])\n"
            "io.write_pfm(sys.argv[2], np.full(img.shape[:2], 0.5, dtype=np.float32))\n"
        )
        values = np.clip(bandlimited(64).astype(np.float64), 0.01, 1.0)
        psio.write_depth(workdir / "gt.pfm",
                         ps.DepthMap(values, np.ones_like(values, bool), units="normalized"))
        out = workdir / "cmd_sweep.csv"
        rc = main(["sweep", "--pred-cmd", f"python3 {script}",
                   "--image", str(workdir / "pano.png"), "--gt", str(workdir / "gt.pfm"),
                   "--angles", "0 18", "--zooms", "1.0", "--output", str(out)])
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 1 + 3


class TestAugmentCommand:
    def setup_dirs(self, tmp_path):
        (tmp_path / "imgs").mkdir()
        (tmp_path / "pseudo").mkdir()
        img = bandlimited(32, 3)
        psio.write_image(tmp_path / "imgs" / "a.png", img)
        values = np.clip(bandlimited(32).astype(np.float64), 0.01, 1.0)
        d = ps.DepthMap(values, np.ones_like(values, bool), units="normalized")
        psio.write_depth(tmp_path / "pseudo" / "a.pfm", d)
        return tmp_path

    def test_degenerate_ranges_copy_inputs(self, tmp_path):
        root = self.setup_dirs(tmp_path)
        rc = main(["augment", "--image-dir", str(root / "imgs"),
                   "--pseudo-dir", str(root / "pseudo"), "--out", str(root / "out"),
                   "--count", "2", "--theta-range", "0", "0", "--zoom-range", "1", "1"])
        assert rc == 0
        src = psio.read_image(root / "imgs" / "a.png")
        out = psio.read_image(root / "out" / "000000" / "image.png")
        np.testing.assert_allclose(out, src, atol=1 / 255)

    def test_rerun_identical_digests(self, tmp_path):
        root = self.setup_dirs(tmp_path)
        argv = ["augment", "--image-dir", str(root / "imgs"),
                "--pseudo-dir", str(root / "pseudo"), "--out", str(root / "outA"),
                "--count", "3", "--seed", "9"]
        assert main(argv) == 0
        digests1 = {str(p): sha(p) for p in sorted((root / "outA").rglob("*")) if p.is_file()}
        assert main(argv) == 0
        digests2 = {str(p): sha(p) for p in sorted((root / "outA").rglob("*")) if p.is_file()}
        assert digests1 == digests2

    def test_default_ranges_recorded(self, tmp_path):
        root = self.setup_dirs(tmp_path)
        rc = main(["augment", "--image-dir", str(root / "imgs"),
                   "--pseudo-dir", str(root / "pseudo"), "--out", str(root / "out2"),
                   "--count", "1"])
        assert rc == 0
        params = json.loads((root / "out2" / "000000" / "params.json").read_text())
        assert -10.0 <= params["theta_deg"] < 10.0
        assert 1.0 <= params["zoom"] < 1.5


class TestSmallCommands:
    def test_normalize_and_degenerate(self, workdir, capsys):
        out = workdir / "norm.pfm"
        rc = main(["normalize", "--input", str(workdir / "depth.pfm"), "--output", str(out)])
        assert rc == 0
        norm = psio.read_depth(out, units="normalized")
        got = norm.values[norm.valid]
        assert got.min() >= 0.01 - 1e-7 and got.max() <= 1.0

        psio.write_pfm(workdir / "const.pfm", np.full((16, 32), 2.0, dtype=np.float32))
        rc = main(["normalize", "--input", str(workdir / "const.pfm"),
                   "--output", str(workdir / "x.pfm")])
        assert rc == 2
        assert json.loads(capsys.readouterr().err)["error"] == "DegenerateDepthRange"

    def test_skyfill(self, workdir):
        mask = np.zeros((64, 128), bool)
        mask[:16] = True
        psio.write_mask(workdir / "sky.png", mask)
        norm_in = workdir / "n.pfm"
        main(["normalize", "--input", str(workdir / "depth.pfm"), "--output", str(norm_in)])
        out = workdir / "filled.pfm"
        rc = main(["skyfill", "--input", str(norm_in), "--mask", str(workdir / "sky.png"),
                   "--output", str(out)])
        assert rc == 0
        filled = psio.read_depth(out, units="normalized")
        assert (filled.values[:16] == 1.0).all()

    def test_upscale_doubles(self, workdir):
        out = workdir / "up.png"
        rc = main(["upscale", "--input", str(workdir / "pano.png"), "--factor", "2",
                   "--output", str(out)])
        assert rc == 0
        assert psio.read_image(out).shape == (128, 256, 3)

    def test_losses_eval_zero_for_identical(self, workdir, capsys):
        main(["normalize", "--input", str(workdir / "depth.pfm"),
              "--output", str(workdir / "n2.pfm")])
        rc = main(["losses", "eval", "--pred", str(workdir / "n2.pfm"),
                   "--gt", str(workdir / "n2.pfm")])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["silog"] == 0.0 and doc["gradient"] == 0.0
        assert doc["epnl"] == 0.0 and doc["supervised"] == 0.0

    def test_pointcloud(self, workdir):
        out = workdir / "cloud.ply"
        rc = main(["pointcloud", "--input", str(workdir / "depth.pfm"), "--output", str(out)])
        assert rc == 0
        pts = psio.read_ply_points(out)
        assert pts.shape == (64 * 128, 3)

    def test_version(self, capsys):
        assert main(["--version"]) == 0
        assert ps.__version__ in capsys.readouterr().out
