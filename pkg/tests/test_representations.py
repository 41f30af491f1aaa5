import numpy as np
import pytest

import pansphere as ps
from conftest import bandlimited, psnr

G504 = ps.ErpGrid.from_height(504)
G128 = ps.ErpGrid.from_height(128)


class TestGeometryTables:
    def test_cube_layout(self):
        specs = ps.cube_specs(G504)
        assert len(specs) == 6
        assert all(s.resolution == (252, 252) for s in specs)
        assert all(s.fov_deg == (90.0, 90.0) for s in specs)
        assert specs[0].name == "front" and specs[0].center == (0.0, 0.0)
        lons = {s.name: round(np.degrees(s.center[0])) for s in specs}
        assert lons["left"] == -90 and lons["right"] == 90 and lons["back"] in (180, -180)

    def test_tangent_layout(self):
        specs = ps.tangent_specs(G504)
        assert len(specs) == 18
        assert all(s.resolution == (126, 126) for s in specs)
        assert all(s.fov_deg == (80.0, 80.0) for s in specs)
        # equator group 4..15 sits at +-22.5 deg, pole groups at +-67.5
        for s in specs:
            lat = abs(np.degrees(s.center[1]))
            if 4 <= s.index <= 15:
                assert lat == pytest.approx(22.5)
            else:
                assert lat == pytest.approx(67.5)
        assert [s.index for s in specs] == list(range(1, 19))

    def test_slice_resolutions_504(self):
        hs = ps.erp_to_hslices(bandlimited(504, 3))
        vs = ps.erp_to_vslices(bandlimited(504, 3))
        assert [img.shape for img in hs.images()] == [(126, 1008, 3)] * 4
        assert [img.shape for img in vs.images()] == [(504, 252, 3)] * 4

    def test_patch_count_enforced(self):
        hs = ps.erp_to_hslices(bandlimited(64))
        with pytest.raises(ps.ShapeMismatch):
            ps.PatchSet("hslice", hs.patches[:3], hs.grid)


class TestGnomonic:
    def test_front_face_center_is_origin_direction(self):
        spec = ps.cube_specs(G504)[0]
        n = spec.resolution[0]
        x, y, z = ps.gnomonic_directions(spec, (n - 1) / 2, (n - 1) / 2)
        np.testing.assert_allclose((x, y, z), (1.0, 0.0, 0.0), atol=1e-15)

    def test_forward_inverse_round_trip(self, rng):
        for spec in ps.cube_specs(G128) + ps.tangent_specs(G128):
            rows, cols = spec.resolution
            c = rng.uniform(0, cols - 1, 200)
            r = rng.uniform(0, rows - 1, 200)
            x, y, z = ps.gnomonic_directions(spec, c, r)
            c2, r2, inside, _ = ps.gnomonic_pixels(spec, x, y, z)
            assert inside.all()
            # angular error via the chord (arccos saturates near 1)
            x2, y2, z2 = ps.gnomonic_directions(spec, c2, r2)
            chord = np.sqrt((x - x2) ** 2 + (y - y2) ** 2 + (z - z2) ** 2)
            assert np.max(chord) < 1e-9
            assert np.max(np.abs(c2 - c)) < 1e-9 and np.max(np.abs(r2 - r)) < 1e-9

    def test_coverage_full_sphere(self):
        assert ps.coverage_counts("cube", G128).min() >= 1
        assert ps.coverage_counts("tangent", G128).min() >= 1


class TestConversions:
    def test_constant_image_constant_patches(self):
        const = np.full((64, 128, 3), 0.25, dtype=np.float32)
        for convert in (ps.erp_to_cubemap, ps.erp_to_tangent):
            for img in convert(const).images():
                np.testing.assert_allclose(img, 0.25, atol=1e-6)

    def test_cubemap_resolution_504(self):
        faces = ps.erp_to_cubemap(bandlimited(504, 3))
        assert [img.shape for img in faces.images()] == [(252, 252, 3)] * 6

    def test_hslice_round_trip_bit_exact(self, rng):
        img = rng.random((64, 128, 3)).astype(np.float32)
        back = ps.patchset_to_erp(ps.erp_to_hslices(img))
        np.testing.assert_array_equal(back, img)

    def test_vslice_round_trip_bit_exact(self, rng):
        img = rng.random((64, 128, 3)).astype(np.float32)
        back = ps.patchset_to_erp(ps.erp_to_vslices(img))
        np.testing.assert_array_equal(back, img)

    def test_cube_round_trip_psnr(self):
        img = bandlimited(504, 3)
        back = ps.patchset_to_erp(ps.erp_to_cubemap(img))
        assert psnr(back, img) > 35.0

    def test_tangent_round_trip_psnr(self):
        img = bandlimited(504, 3)
        back = ps.patchset_to_erp(ps.erp_to_tangent(img))
        assert psnr(back, img) > 32.0

    def test_blend_weights_normalized(self):
        # reassembling all-ones patches must give exactly ones everywhere
        ones = np.ones((64, 128), dtype=np.float64)
        for convert in (ps.erp_to_cubemap, ps.erp_to_tangent):
            patchset = convert(ones)
            back = ps.patchset_to_erp(patchset)
            assert np.max(np.abs(back - 1.0)) < 1e-9

    def test_depth_arrays_convert(self, rng):
        d = rng.uniform(0.1, 1.0, (64, 128))
        back = ps.patchset_to_erp(ps.erp_to_hslices(d))
        np.testing.assert_array_equal(back, d)


class TestRegionMasks:
    def test_hslice_rows(self):
        eq, pole = ps.region_masks("hslice", G128)
        H = G128.height
        assert eq[H // 4, 0] and eq[3 * H // 4 - 1, 0]
        assert not eq[H // 4 - 1, 0] and not eq[3 * H // 4, 0]
        assert (eq | pole).all() and not (eq & pole).any()

    def test_cube_side_faces_are_equator(self):
        eq, pole = ps.region_masks("cube", G128)
        assert (eq | pole).all() and not (eq & pole).any()
        x, y, z = ps.erp_direction_grid(G128)
        np.testing.assert_array_equal(pole, np.abs(z) > np.maximum(np.abs(x), np.abs(y)))
        # equator row belongs to the side faces, pole row to top/down
        assert eq[G128.height // 2, 0] and pole[0, 0]

    def test_tangent_partition(self):
        eq, pole = ps.region_masks("tangent", G128)
        assert (eq | pole).all() and not (eq & pole).any()
        assert eq[G128.height // 2, 10] and pole[0, 10]

    def test_vslice_has_no_split(self):
        with pytest.raises(ps.NoRegionSplit):
            ps.region_masks("vslice", G128)


class TestPatchsetIO:
    def test_save_load_round_trip(self, tmp_path, rng):
        img = rng.random((64, 128, 3)).astype(np.float32)
        original = ps.erp_to_hslices(img)
        ps.save_patchset(original, tmp_path / "hs")
        loaded = ps.load_patchset(tmp_path / "hs")
        assert loaded.kind == "hslice"
        assert len(loaded.patches) == 4
        back = ps.patchset_to_erp(loaded)
        # lossless through the 8-bit PNG quantization round trip
        np.testing.assert_allclose(back, np.rint(img * 255) / 255, atol=1 / 510)

    def test_manifest_fields(self, tmp_path):
        img = bandlimited(64, 3)
        path = ps.save_patchset(ps.erp_to_tangent(img), tmp_path / "tp")
        import json

        manifest = json.loads(path.read_text())
        assert manifest["kind"] == "tangent"
        assert len(manifest["patches"]) == 18
        entry = manifest["patches"][0]
        assert {"index", "center_deg", "fov_deg", "resolution", "file"} <= set(entry)
        assert "layout" in manifest

    def test_incomplete_set_rejected(self, tmp_path, rng):
        img = rng.random((64, 128, 3)).astype(np.float32)
        ps.save_patchset(ps.erp_to_hslices(img), tmp_path / "hs")
        (tmp_path / "hs" / "hslice_03.png").unlink()
        with pytest.raises(ps.ShapeMismatch):
            ps.load_patchset(tmp_path / "hs")
