"""Conversions between the ERP panorama and four alternative representations:
cubemap faces (CP), gnomonic tangent patches (TP), horizontal slices (HS),
and vertical slices (VS), plus reassembly back to the ERP plane.

Geometry at the reference height H = 504:

* CP: 6 faces, 90 x 90 deg, 252 x 252 px; equator group {front, left, right,
  back}, pole group {top, down}.
* TP: 18 patches, 80 x 80 deg, 126 x 126 px. Centers sit in four latitude
  rows of 3/6/6/3 patches at +67.5/+22.5/-22.5/-67.5 deg, adjacent rows
  offset by half a longitude step; indices 4-15 form the equator group.
* HS: 4 row bands of H/4 rows (45 x 360 deg); slices 2 and 3 are the equator
  group. VS: 4 column bands of W/4 columns (180 x 90 deg), first slice
  centered on longitude -135 deg; no region grouping.

CP/TP extraction samples the ERP bilinearly through the gnomonic
(perspective) projection; slices are exact row/column partitions, so their
round trips are bit-identical. Reassembly blends contributing patches with
weights proportional to the cosine of the angular distance to each patch
center, normalized over contributors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io as psio
from .errors import InternalCoverageError, InvalidErpShape, NoRegionSplit, ShapeMismatch
from .resample import sample_erp, sample_patch
from .sphere import ErpGrid, angles_to_pixel, erp_direction_grid, pixel_to_angles, sp, sp_inv

PATCH_COUNTS = {"cube": 6, "tangent": 18, "hslice": 4, "vslice": 4}

# include directions within a sliver outside the exact FoV so shared patch
# edges are owned by every adjacent patch
_FOV_EDGE_EPS = 1e-9

_TP_LAYOUT_NOTE = (
    "tangent rows 3/6/6/3 at latitudes +67.5/+22.5/-22.5/-67.5 deg, adjacent "
    "rows offset by half a longitude step"
)


@dataclass(frozen=True)
class PatchSpec:
    """Descriptor of one patch: where it looks and how it is rasterized."""

    index: int  # 1-based
    kind: str  # cube | tangent | hslice | vslice
    center: tuple[float, float]  # (theta, phi) radians
    fov_deg: tuple[float, float]  # (vertical, horizontal) degrees
    resolution: tuple[int, int]  # (rows, cols)
    name: str = ""

    def __post_init__(self):
        if not (0.0 < self.fov_deg[0] <= 180.0 and 0.0 < self.fov_deg[1] <= 360.0):
            raise ValueError(f"FoV out of range: {self.fov_deg}")
        if self.resolution[0] <= 0 or self.resolution[1] <= 0:
            raise ValueError(f"resolution must be positive: {self.resolution}")


@dataclass
class PatchSet:
    """An ordered set of (PatchSpec, image) pairs cut from one ERP source."""

    kind: str
    patches: list  # [(PatchSpec, np.ndarray), ...]
    grid: ErpGrid

    def __post_init__(self):
        expected = PATCH_COUNTS.get(self.kind)
        if expected is None:
            raise ValueError(f"unknown representation kind {self.kind!r}")
        if len(self.patches) != expected:
            raise ShapeMismatch(
                f"{self.kind} needs {expected} patches, got {len(self.patches)}"
            )

    def images(self) -> list:
        return [img for _, img in self.patches]

    def specs(self) -> list:
        return [spec for spec, _ in self.patches]


def _patch_frame(theta_c: float, phi_c: float):
    """Orthonormal (normal, east, up) frame of the tangent plane at a center."""
    n = np.array(sp(theta_c, phi_c), dtype=np.float64)
    if abs(np.cos(phi_c)) < 1e-12:  # pole-centered: east is ambiguous, fix +y
        e1 = np.array([0.0, 1.0, 0.0])
    else:
        e1 = np.array([-np.sin(theta_c), np.cos(theta_c), 0.0])
    e2 = np.cross(n, e1)
    return n, e1, e2


def _tan_half(spec: PatchSpec):
    fv, fh = spec.fov_deg
    return np.tan(np.radians(fv) / 2.0), np.tan(np.radians(fh) / 2.0)


def gnomonic_directions(spec: PatchSpec, col, row):
    """Unit directions of (fractional) patch pixel coordinates (col, row)."""
    rows, cols = spec.resolution
    tan_v, tan_h = _tan_half(spec)
    n, e1, e2 = _patch_frame(*spec.center)
    col = np.asarray(col, dtype=np.float64)
    row = np.asarray(row, dtype=np.float64)
    a = (2.0 * (col + 0.5) / cols - 1.0) * tan_h
    b = (1.0 - 2.0 * (row + 0.5) / rows) * tan_v
    x = n[0] + a * e1[0] + b * e2[0]
    y = n[1] + a * e1[1] + b * e2[1]
    z = n[2] + a * e1[2] + b * e2[2]
    norm = np.sqrt(x * x + y * y + z * z)
    return x / norm, y / norm, z / norm


def gnomonic_pixels(spec: PatchSpec, x, y, z):
    """Project directions into patch pixel coordinates.

    Returns (col, row, inside, cos_dist): fractional pixel coordinates, a
    mask of directions within the patch FoV, and the cosine of the angular
    distance to the patch center (the blending weight).
    """
    rows, cols = spec.resolution
    tan_v, tan_h = _tan_half(spec)
    n, e1, e2 = _patch_frame(*spec.center)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    t = x * n[0] + y * n[1] + z * n[2]
    front = t > 1e-12
    safe = np.where(front, t, 1.0)
    a = (x * e1[0] + y * e1[1] + z * e1[2]) / safe
    b = (x * e2[0] + y * e2[1] + z * e2[2]) / safe
    inside = (
        front
        & (np.abs(a) <= tan_h * (1.0 + _FOV_EDGE_EPS))
        & (np.abs(b) <= tan_v * (1.0 + _FOV_EDGE_EPS))
    )
    col = (a / tan_h + 1.0) / 2.0 * cols - 0.5
    row = (1.0 - b / tan_v) / 2.0 * rows - 0.5
    return col, row, inside, t


def cube_specs(grid: ErpGrid) -> list[PatchSpec]:
    if grid.height % 2:
        raise InvalidErpShape(f"cubemap needs H divisible by 2, got H={grid.height}")
    size = grid.height // 2
    faces = [
        ("front", 0.0, 0.0),
        ("left", -90.0, 0.0),
        ("right", 90.0, 0.0),
        ("back", 180.0, 0.0),
        ("top", 0.0, 90.0),
        ("down", 0.0, -90.0),
    ]
    return [
        PatchSpec(
            index=i + 1,
            kind="cube",
            center=(np.radians(lon), np.radians(lat)),
            fov_deg=(90.0, 90.0),
            resolution=(size, size),
            name=name,
        )
        for i, (name, lon, lat) in enumerate(faces)
    ]


def tangent_specs(grid: ErpGrid) -> list[PatchSpec]:
    size = max(grid.height // 4, 1)
    rows = [
        (67.5, [-120.0, 0.0, 120.0]),
        (22.5, [-150.0, -90.0, -30.0, 30.0, 90.0, 150.0]),
        (-22.5, [-120.0, -60.0, 0.0, 60.0, 120.0, 180.0]),
        (-67.5, [-60.0, 60.0, 180.0]),
    ]
    specs = []
    index = 1
    for lat, lons in rows:
        for lon in lons:
            specs.append(
                PatchSpec(
                    index=index,
                    kind="tangent",
                    center=(np.radians(lon), np.radians(lat)),
                    fov_deg=(80.0, 80.0),
                    resolution=(size, size),
                )
            )
            index += 1
    return specs


def _slice_specs(grid: ErpGrid, kind: str) -> list[PatchSpec]:
    H, W = grid.shape
    if H % 4 or W % 4:
        raise InvalidErpShape(f"slices need H and W divisible by 4, got {H}x{W}")
    specs = []
    for k in range(4):
        if kind == "hslice":
            center_row = k * H / 4 + H / 8 - 0.5
            _, phi = pixel_to_angles(0.0, center_row, grid)
            center = (0.0, float(phi))
            fov = (45.0, 360.0)
            res = (H // 4, W)
        else:
            center_col = k * W / 4 + W / 8 - 0.5
            theta, _ = pixel_to_angles(center_col, 0.0, grid)
            center = (float(theta), 0.0)
            fov = (180.0, 90.0)
            res = (H, W // 4)
        specs.append(PatchSpec(index=k + 1, kind=kind, center=center, fov_deg=fov, resolution=res))
    return specs


def _extract_gnomonic(img: np.ndarray, spec: PatchSpec, grid: ErpGrid) -> np.ndarray:
    rows, cols = spec.resolution
    cc, rr = np.meshgrid(np.arange(cols, dtype=np.float64), np.arange(rows, dtype=np.float64))
    x, y, z = gnomonic_directions(spec, cc, rr)
    theta, phi = sp_inv(x, y, z, validate=False)
    u, v = angles_to_pixel(theta, phi, grid)
    return sample_erp(img, u, v, mode="bilinear")


def erp_to_cubemap(img: np.ndarray, grid: ErpGrid | None = None) -> PatchSet:
    """Cut an ERP image into 6 gnomonic cube faces of H/2 x H/2 pixels."""
    img = np.asarray(img)
    grid = grid or ErpGrid.from_shape(img.shape)
    patches = [(spec, _extract_gnomonic(img, spec, grid)) for spec in cube_specs(grid)]
    return PatchSet("cube", patches, grid)


def erp_to_tangent(img: np.ndarray, grid: ErpGrid | None = None) -> PatchSet:
    """Cut an ERP image into 18 gnomonic tangent patches of H/4 x H/4 pixels."""
    img = np.asarray(img)
    grid = grid or ErpGrid.from_shape(img.shape)
    patches = [(spec, _extract_gnomonic(img, spec, grid)) for spec in tangent_specs(grid)]
    return PatchSet("tangent", patches, grid)


def erp_to_hslices(img: np.ndarray, grid: ErpGrid | None = None) -> PatchSet:
    """Split an ERP image into 4 horizontal bands of H/4 rows (lossless)."""
    img = np.asarray(img)
    grid = grid or ErpGrid.from_shape(img.shape)
    H = grid.height
    specs = _slice_specs(grid, "hslice")
    patches = [(s, img[k * H // 4 : (k + 1) * H // 4].copy()) for k, s in enumerate(specs)]
    return PatchSet("hslice", patches, grid)


def erp_to_vslices(img: np.ndarray, grid: ErpGrid | None = None) -> PatchSet:
    """Split an ERP image into 4 vertical bands of W/4 columns (lossless)."""
    img = np.asarray(img)
    grid = grid or ErpGrid.from_shape(img.shape)
    W = grid.width
    specs = _slice_specs(grid, "vslice")
    patches = [(s, img[:, k * W // 4 : (k + 1) * W // 4].copy()) for k, s in enumerate(specs)]
    return PatchSet("vslice", patches, grid)


def patchset_to_erp(ps: PatchSet, grid: ErpGrid | None = None) -> np.ndarray:
    """Reassemble a patch set onto the ERP plane.

    Slices concatenate exactly. Cube/tangent sets sample every contributing
    patch at the inverse-gnomonic position and blend with cosine-distance
    weights normalized over contributors.
    """
    grid = grid or ps.grid
    ordered = sorted(ps.patches, key=lambda p: p[0].index)
    if ps.kind == "hslice":
        return np.concatenate([img for _, img in ordered], axis=0)
    if ps.kind == "vslice":
        return np.concatenate([img for _, img in ordered], axis=1)

    x, y, z = erp_direction_grid(grid)
    first = ordered[0][1]
    channels = first.shape[2] if first.ndim == 3 else 0
    out_shape = grid.shape + ((channels,) if channels else ())
    acc = np.zeros(out_shape, dtype=np.float64)
    wsum = np.zeros(grid.shape, dtype=np.float64)
    for spec, pimg in ordered:
        col, row, inside, t = gnomonic_pixels(spec, x, y, z)
        idx = np.nonzero(inside)
        if idx[0].size == 0:
            continue
        vals = sample_patch(pimg, col[idx], row[idx], mode="bilinear").astype(np.float64)
        w = t[idx]
        if channels:
            acc[idx] += w[:, None] * vals
        else:
            acc[idx] += w * vals
        wsum[idx] += w
    if np.any(wsum <= 0):
        raise InternalCoverageError(
            f"{int(np.sum(wsum <= 0))} ERP pixels covered by no {ps.kind} patch"
        )
    if channels:
        out = acc / wsum[:, :, None]
    else:
        out = acc / wsum
    return out.astype(first.dtype, copy=False)


def coverage_counts(kind: str, grid: ErpGrid) -> np.ndarray:
    """How many patches of the given kind contain each ERP pixel direction."""
    specs = {"cube": cube_specs, "tangent": tangent_specs}.get(kind)
    if specs is None:
        raise ValueError(f"coverage is only defined for cube|tangent, got {kind!r}")
    x, y, z = erp_direction_grid(grid)
    count = np.zeros(grid.shape, dtype=np.int32)
    for spec in specs(grid):
        _, _, inside, _ = gnomonic_pixels(spec, x, y, z)
        count += inside.astype(np.int32)
    return count


def region_masks(kind: str, grid: ErpGrid):
    """ERP-plane (equator_mask, pole_mask) partition for cube/tangent/hslice.

    Ownership: hslice by row band, cube by dominant axis, tangent by nearest
    patch center. Vertical slices have no region grouping (NoRegionSplit).
    """
    H, W = grid.shape
    if kind == "vslice":
        raise NoRegionSplit("vertical slices define no equator/pole regions")
    if kind == "hslice":
        eq = np.zeros((H, W), dtype=bool)
        eq[H // 4 : 3 * H // 4, :] = True
        return eq, ~eq
    if kind == "cube":
        x, y, z = erp_direction_grid(grid)
        pole = np.abs(z) > np.maximum(np.abs(x), np.abs(y))
        return ~pole, pole
    if kind == "tangent":
        x, y, z = erp_direction_grid(grid)
        specs = tangent_specs(grid)
        best = np.full((H, W), -np.inf)
        owner = np.zeros((H, W), dtype=np.int32)
        for spec in specs:
            n, _, _ = _patch_frame(*spec.center)
            dot = x * n[0] + y * n[1] + z * n[2]
            take = dot > best
            best = np.where(take, dot, best)
            owner[take] = spec.index
        eq = (owner >= 4) & (owner <= 15)
        return eq, ~eq
    raise ValueError(f"unknown representation kind {kind!r}")


def save_patchset(ps: PatchSet, out_dir) -> Path:
    """Write patches plus a JSON manifest; returns the manifest path.

    3D patches are saved as 8-bit PNG, 2D patches as PFM. The manifest
    records kind, indices, centers in degrees, FoV, resolution, and the
    tangent layout convention.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for spec, img in sorted(ps.patches, key=lambda p: p[0].index):
        ext = "png" if img.ndim == 3 else "pfm"
        fname = f"{ps.kind}_{spec.index:02d}.{ext}"
        if ext == "png":
            psio.write_image(out_dir / fname, img)
        else:
            psio.write_pfm(out_dir / fname, img)
        theta, phi = spec.center
        entries.append(
            {
                "index": spec.index,
                "name": spec.name,
                "center_deg": [float(np.degrees(theta)), float(np.degrees(phi))],
                "fov_deg": list(spec.fov_deg),
                "resolution": list(spec.resolution),
                "file": fname,
            }
        )
    manifest = {
        "kind": ps.kind,
        "source_height": ps.grid.height,
        "source_width": ps.grid.width,
        "patches": entries,
    }
    if ps.kind == "tangent":
        manifest["layout"] = _TP_LAYOUT_NOTE
    path = out_dir / "patchset.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return path


def load_patchset(in_dir) -> PatchSet:
    """Load a patch set from a directory written by save_patchset.

    An incomplete set (missing manifest entries or patch files) raises
    ShapeMismatch, a domain error.
    """
    in_dir = Path(in_dir)
    manifest = json.loads((in_dir / "patchset.json").read_text())
    grid = ErpGrid(manifest["source_height"], manifest["source_width"])
    missing = [e["file"] for e in manifest["patches"] if not (in_dir / e["file"]).exists()]
    if missing:
        raise ShapeMismatch(f"incomplete patch set, missing files: {missing}")
    patches = []
    for entry in manifest["patches"]:
        spec = PatchSpec(
            index=entry["index"],
            kind=manifest["kind"],
            center=(np.radians(entry["center_deg"][0]), np.radians(entry["center_deg"][1])),
            fov_deg=tuple(entry["fov_deg"]),
            resolution=tuple(entry["resolution"]),
            name=entry.get("name", ""),
        )
        fname = in_dir / entry["file"]
        if fname.suffix == ".png":
            img = psio.read_image(fname)
        else:
            img = psio.read_pfm(fname)
        patches.append((spec, img))
    return PatchSet(manifest["kind"], patches, grid)
