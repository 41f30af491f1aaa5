"""File I/O: PNG/JPEG images, PFM and 16-bit-PNG depth, masks, and PLY clouds.

Depth files come in two flavors:

* PFM -- "Pf" header, little-endian via a negative scale line, rows stored
  bottom-up. Invalid pixels are stored as 0 and masked out on read.
* 16-bit PNG with a mandatory JSON sidecar ``<stem>.json`` holding
  ``{"depth_scale": meters_per_unit, "units": ...}``. Sidecar-less 16-bit
  PNGs are refused so units can never be guessed silently.

Images are exchanged as float32 H x W x 3 in [0, 1].
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .depth import DepthMap
from .errors import ShapeMismatch


def read_image(path) -> np.ndarray:
    """Load PNG/JPEG as float32 H x W x 3 in [0, 1]."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("RGB"), dtype=np.float32)
    return arr / 255.0


def write_image(path, img: np.ndarray) -> None:
    """Write a float image in [0, 1] (H x W or H x W x 3) as 8-bit PNG/JPEG."""
    img = np.asarray(img)
    if img.ndim == 2:
        img = np.repeat(img[:, :, None], 3, axis=2)
    data = np.clip(np.rint(img.astype(np.float64) * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="RGB").save(path)


def read_mask(path) -> np.ndarray:
    """Load an 8-bit PNG mask; nonzero means set."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"))
    return arr > 0


def write_mask(path, mask: np.ndarray) -> None:
    data = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path)


def read_pfm(path) -> np.ndarray:
    """Read a PFM file into float32 (H, W) or (H, W, 3), top-down row order."""
    with open(path, "rb") as f:
        header = f.readline().strip()
        if header == b"Pf":
            channels = 1
        elif header == b"PF":
            channels = 3
        else:
            raise ValueError(f"{path}: not a PFM file (header {header!r})")
        dims = f.readline().split()
        width, height = int(dims[0]), int(dims[1])
        scale = float(f.readline().strip())
        endian = "<" if scale < 0 else ">"
        count = width * height * channels
        data = np.frombuffer(f.read(count * 4), dtype=endian + "f4", count=count)
    shape = (height, width, channels) if channels == 3 else (height, width)
    return np.flipud(data.reshape(shape)).copy()


def write_pfm(path, values: np.ndarray) -> None:
    """Write a 2D float array as little-endian grayscale PFM."""
    values = np.asarray(values, dtype=np.float32)
    if values.ndim != 2:
        raise ShapeMismatch(f"PFM writer expects H x W, got shape {values.shape}")
    height, width = values.shape
    with open(path, "wb") as f:
        f.write(b"Pf\n")
        f.write(f"{width} {height}\n".encode("ascii"))
        f.write(b"-1.0\n")
        f.write(np.flipud(values).astype("<f4").tobytes())


def _sidecar_path(png_path: Path) -> Path:
    return png_path.with_suffix(".json")


def read_depth(path, units: str | None = None) -> DepthMap:
    """Load a depth map from PFM or 16-bit PNG (+ JSON sidecar).

    Pixels that are non-finite or <= 0 are invalid. ``units`` overrides the
    default "metric" for PFM; for PNG the sidecar's units field wins.
    """
    path = Path(path)
    if path.suffix.lower() == ".pfm":
        values = read_pfm(path)
        if values.ndim != 2:
            raise ShapeMismatch(f"{path}: depth PFM must be single-channel")
        return DepthMap.from_array(values, units=units or "metric")
    if path.suffix.lower() == ".png":
        sidecar = _sidecar_path(path)
        if not sidecar.exists():
            raise FileNotFoundError(
                f"{path}: 16-bit PNG depth requires a JSON sidecar at {sidecar}"
            )
        meta = json.loads(sidecar.read_text())
        with Image.open(path) as im:
            raw = np.asarray(im, dtype=np.float64)
        if raw.ndim != 2:
            raise ShapeMismatch(f"{path}: depth PNG must be single-channel")
        values = raw * float(meta["depth_scale"])
        return DepthMap.from_array(values, units=meta.get("units", units or "metric"))
    raise ValueError(f"{path}: unsupported depth format (use .pfm or .png)")


def write_depth(path, depth: DepthMap) -> None:
    """Write a depth map as PFM (invalid -> 0) or 16-bit PNG + sidecar."""
    path = Path(path)
    if path.suffix.lower() == ".pfm":
        values = depth.values.astype(np.float32).copy()
        values[~depth.valid] = 0.0
        write_pfm(path, values)
        return
    if path.suffix.lower() == ".png":
        finite_max = float(depth.values[depth.valid].max()) if depth.valid.any() else 1.0
        scale = max(finite_max, 1e-12) / 65535.0
        raw = np.zeros(depth.shape, dtype=np.uint16)
        raw[depth.valid] = np.clip(
            np.rint(depth.values[depth.valid] / scale), 0, 65535
        ).astype(np.uint16)
        Image.fromarray(raw).save(path)  # uint16 -> 16-bit grayscale PNG
        _sidecar_path(path).write_text(
            json.dumps({"depth_scale": scale, "units": depth.units}, sort_keys=True)
        )
        return
    raise ValueError(f"{path}: unsupported depth format (use .pfm or .png)")


def write_ply(path, points: np.ndarray) -> None:
    """Write an (N, 3) point array as binary little-endian PLY (float32 xyz)."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 3:
        raise ShapeMismatch(f"expected (N, 3) points, got shape {points.shape}")
    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        f"element vertex {points.shape[0]}\n"
        "property float x\n"
        "property float y\n"
        "property float z\n"
        "end_header\n"
    )
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(points.astype("<f4").tobytes())


def read_ply_points(path) -> np.ndarray:
    """Read back a point-only binary PLY written by write_ply."""
    with open(path, "rb") as f:
        line = f.readline()
        if line.strip() != b"ply":
            raise ValueError(f"{path}: not a PLY file")
        count = 0
        while True:
            line = f.readline()
            if not line:
                raise ValueError(f"{path}: truncated PLY header")
            if line.startswith(b"element vertex"):
                count = int(line.split()[-1])
            if line.strip() == b"end_header":
                break
        data = np.frombuffer(f.read(count * 12), dtype="<f4", count=count * 3)
    return data.reshape(count, 3).astype(np.float64)
