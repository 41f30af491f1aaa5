import numpy as np
import pytest

import pansphere as ps
from conftest import bandlimited, dmap


def metrics_oracle(pred, gt, valid, max_depth=None):
    """Per-pixel Python loop, straight from the formulas."""
    abs_rel = 0.0
    sq = 0.0
    hits = [0, 0, 0]
    k = 0
    H, W = pred.shape
    for i in range(H):
        for j in range(W):
            g = gt[i, j]
            if not valid[i, j] or not np.isfinite(g) or g <= 0:
                continue
            if max_depth is not None and g > max_depth:
                continue
            d = pred[i, j]
            k += 1
            abs_rel += abs(d - g) / g
            sq += (d - g) ** 2
            dc = max(d, 1e-6)
            ratio = max(dc / g, g / dc)
            for t, thresh in enumerate((1.25, 1.25**2, 1.25**3)):
                if ratio < thresh:
                    hits[t] += 1
    return abs_rel / k, np.sqrt(sq / k), hits[0] / k, hits[1] / k, hits[2] / k, k


FIXTURE_PRED = [[1.0, 2.0, 3.0]]
FIXTURE_GT = [[1.0, 2.0, 5.0]]


class TestComputeMetrics:
    def test_perfect_prediction(self, rng):
        d = dmap(rng.uniform(0.5, 5.0, (8, 8)), units="metric")
        r = ps.compute_metrics(d, d)
        assert r.abs_rel == 0.0 and r.rmse == 0.0
        assert r.delta1 == r.delta2 == r.delta3 == 1.0
        assert r.valid_pixels == 64

    def test_hand_solved_fixture(self):
        r = ps.compute_metrics(dmap(FIXTURE_PRED, units="metric"),
                               dmap(FIXTURE_GT, units="metric"))
        assert r.abs_rel == pytest.approx(0.133333, abs=1e-6)
        assert r.rmse == pytest.approx(1.154701, abs=1e-6)
        assert r.delta1 == pytest.approx(2 / 3, abs=1e-12)
        assert r.delta2 == pytest.approx(2 / 3, abs=1e-12)
        assert r.delta3 == 1.0

    def test_affine_alignment_makes_perfect(self, rng):
        gt = dmap(rng.uniform(0.5, 5.0, (8, 8)), units="metric")
        pred = dmap(2.0 * gt.values + 3.0, units="metric")
        r = ps.compute_metrics(pred, gt, align="depth")
        assert r.abs_rel < 1e-9 and r.rmse < 1e-9 and r.delta1 == 1.0

    def test_oracle_agreement(self, rng):
        for _ in range(10):
            pred = rng.uniform(0.1, 10.0, (16, 32))
            gt = rng.uniform(0.1, 10.0, (16, 32))
            valid = rng.random((16, 32)) > 0.2
            r = ps.compute_metrics(ps.DepthMap(pred, valid, units="metric"),
                                   ps.DepthMap(gt, valid, units="metric"))
            oa, orm, d1, d2, d3, k = metrics_oracle(pred, gt, valid)
            assert r.abs_rel == pytest.approx(oa, abs=1e-12)
            assert r.rmse == pytest.approx(orm, abs=1e-12)
            assert (r.delta1, r.delta2, r.delta3) == (d1, d2, d3)
            assert r.valid_pixels == k

    def test_delta_monotonicity(self, rng):
        for _ in range(20):
            pred = dmap(rng.uniform(0.1, 10.0, (8, 8)), units="metric")
            gt = dmap(rng.uniform(0.1, 10.0, (8, 8)), units="metric")
            r = ps.compute_metrics(pred, gt)
            assert r.delta1 <= r.delta2 <= r.delta3

    def test_delta_symmetric_absrel_not(self, rng):
        pred = dmap(rng.uniform(0.5, 5.0, (8, 8)), units="metric")
        gt = dmap(rng.uniform(0.5, 5.0, (8, 8)), units="metric")
        a = ps.compute_metrics(pred, gt)
        b = ps.compute_metrics(gt, pred)
        assert (a.delta1, a.delta2, a.delta3) == (b.delta1, b.delta2, b.delta3)
        assert a.abs_rel != pytest.approx(b.abs_rel, abs=1e-9)

    def test_capping_excludes_outliers(self, rng):
        pred = rng.uniform(0.5, 5.0, (8, 8))
        gt = rng.uniform(0.5, 5.0, (8, 8))
        outlier = np.zeros((8, 8), bool)
        outlier[0, :4] = True
        pred2, gt2 = pred.copy(), gt.copy()
        gt2[outlier] = 50.0  # beyond the cap
        pred2[outlier] = 999.0
        capped = ps.compute_metrics(dmap(pred2, units="metric"), dmap(gt2, units="metric"),
                                    max_depth=10.0)
        masked = ps.compute_metrics(
            ps.DepthMap(pred, ~outlier, units="metric"),
            ps.DepthMap(gt, ~outlier, units="metric"),
            max_depth=10.0,
        )
        assert capped == masked
        assert capped.valid_pixels == 60

    def test_empty_overlap(self):
        d = ps.DepthMap(np.ones((4, 4)), np.zeros((4, 4), bool), units="metric")
        with pytest.raises(ps.EmptyOverlap):
            ps.compute_metrics(d, d)


class TestSweep:
    def test_default_grids(self):
        angles = ps.default_angles()
        zooms = ps.default_zooms()
        assert len(angles) == 11 and 0.0 in angles
        assert angles[0] == -90.0 and angles[-1] == 90.0
        assert len(zooms) == 10 and zooms[0] == 0.4 and zooms[-1] == 4.0
        assert len(ps.sweep_cells()) == 21

    def test_oracle_predictor_self_consistency(self):
        H = 126
        img = bandlimited(H, 3)
        gt_values = np.clip(bandlimited(H).astype(np.float64), 0.01, 1.0)
        gt = ps.DepthMap(gt_values, np.ones_like(gt_values, bool), units="normalized")

        def oracle(warped_img, cell):
            return ps.warp_depth_target(gt, cell.spec())

        results = ps.sweep_transformations(oracle, img, gt)
        assert len(results) == 21
        for cell, report in results:
            assert report is not None, f"missing cell {cell}"
            assert report.rmse < 0.02

    def test_cell_failure_recorded(self):
        H = 32
        img = bandlimited(H, 3)
        gt = dmap(np.clip(bandlimited(H).astype(np.float64), 0.01, 1.0))

        def flaky(warped_img, cell):
            if cell.transform == "zoom" and cell.level > 2.0:
                raise RuntimeError("predictor crashed")
            return ps.warp_depth_target(gt, cell.spec())

        results = ps.sweep_transformations(flaky, img, gt, jobs=2)
        missing = [c for c, r in results if r is None]
        assert all(c.transform == "zoom" and c.level > 2.0 for c in missing)
        assert len(missing) == 5
        assert all(r is not None for c, r in results if c.transform == "rotation")

    def test_unknown_transform_rejected(self):
        with pytest.raises(ValueError):
            ps.SweepCell("shear", 1.0).spec()

    def test_parallel_jobs_match_serial(self):
        H = 32
        img = bandlimited(H, 3)
        gt = dmap(np.clip(bandlimited(H).astype(np.float64), 0.01, 1.0))

        def oracle(warped_img, cell):
            return ps.warp_depth_target(gt, cell.spec())

        serial = ps.sweep_transformations(oracle, img, gt, angles=[0.0, 18.0], zooms=[1.0, 2.0])
        parallel = ps.sweep_transformations(oracle, img, gt, angles=[0.0, 18.0],
                                            zooms=[1.0, 2.0], jobs=4)
        assert serial == parallel
