"""Spatial-augmentation sampler: draws (vertical rotation, zoom) pairs from
uniform half-open ranges (defaults [-10, 10) degrees and [1.0, 1.5)), builds
composed warp specs (rotation first, then zoom), and writes augmented
(image, warped pseudo-depth) training pairs.

Randomness is counter based: a Philox stream keyed by the seed assigns one
counter block per sample index, so shards generated in any order or in
parallel produce identical output. Sample directories are byte-identical
across reruns with the same seed and inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io as psio
from .depth import DepthMap
from .errors import ShapeMismatch
from .mobius import WarpSpec, compose, mobius_rotation, mobius_zoom, warp_depth_target, warp_erp

COMPOSE_ORDER = "zoom_after_rotation"


@dataclass(frozen=True)
class MtsaConfig:
    """Sampling ranges (half-open), stream seed, and pair count."""

    theta_range: tuple[float, float] = (-10.0, 10.0)  # degrees
    zoom_range: tuple[float, float] = (1.0, 1.5)
    seed: int = 0
    count: int = 1

    def __post_init__(self):
        lo, hi = self.theta_range
        if not (-90.0 <= lo <= hi <= 90.0):
            raise ValueError(f"theta_range must lie in [-90, 90], got {self.theta_range}")
        zlo, zhi = self.zoom_range
        if not (0.0 < zlo <= zhi):
            raise ValueError(f"zoom_range must be positive, got {self.zoom_range}")
        if self.count < 1:
            raise ValueError("count must be >= 1")


def _scaled(raw: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return lo + (hi - lo) * raw


def draw_params(cfg: MtsaConfig, index: int) -> tuple[float, float]:
    """(theta_deg, zoom) for one sample index; same (seed, index) -> same pair."""
    bg = np.random.Philox(key=cfg.seed)
    bg.advance(index)  # one 128-bit counter block (4 doubles) per index
    raw = np.random.Generator(bg).uniform(size=2)
    theta = _scaled(raw[0], *cfg.theta_range)
    zoom = _scaled(raw[1], *cfg.zoom_range)
    return float(theta), float(zoom)


def draw_params_batch(cfg: MtsaConfig, start: int, count: int) -> np.ndarray:
    """(count, 2) array of (theta_deg, zoom); bit-identical to per-index draws."""
    bg = np.random.Philox(key=cfg.seed)
    bg.advance(start)
    raw = np.random.Generator(bg).uniform(size=(count, 4))[:, :2]
    out = np.empty_like(raw)
    out[:, 0] = _scaled(raw[:, 0], *cfg.theta_range)
    out[:, 1] = _scaled(raw[:, 1], *cfg.zoom_range)
    return out


def spec_for(theta_deg: float, zoom: float, interpolation: str = "bilinear") -> WarpSpec:
    """Warp spec applying the vertical rotation first, then the zoom."""
    m = compose(mobius_zoom(zoom), mobius_rotation(np.radians(theta_deg)))
    return WarpSpec(mobius=m, roll=0.0, interpolation=interpolation)


def draw_spec(cfg: MtsaConfig, index: int, interpolation: str = "bilinear") -> WarpSpec:
    """Deterministic WarpSpec for one sample index."""
    theta, zoom = draw_params(cfg, index)
    return spec_for(theta, zoom, interpolation)


def generate_pair(img: np.ndarray, d_pseudo: DepthMap, spec: WarpSpec):
    """(warped image, warped pseudo depth) for one augmentation sample."""
    img = np.asarray(img)
    if img.shape[:2] != d_pseudo.shape:
        raise ShapeMismatch(f"image {img.shape[:2]} vs depth {d_pseudo.shape}")
    return warp_erp(img, spec), warp_depth_target(d_pseudo, spec)


def generate_dataset(inputs, out_dir, cfg: MtsaConfig) -> list[Path]:
    """Write cfg.count augmented samples, cycling through ``inputs``.

    ``inputs`` is a sequence of (image, DepthMap) pairs. Sample ``i`` uses
    inputs[i % len(inputs)] with the spec for index ``i`` and lands in
    ``<out_dir>/<i:06d>/`` as image.png, depth.pfm, params.json.
    """
    if not inputs:
        raise ValueError("need at least one (image, depth) input pair")
    out_dir = Path(out_dir)
    written = []
    for index in range(cfg.count):
        img, d_pseudo = inputs[index % len(inputs)]
        theta, zoom = draw_params(cfg, index)
        spec = spec_for(theta, zoom)
        warped_img, warped_depth = generate_pair(img, d_pseudo, spec)
        sample_dir = out_dir / f"{index:06d}"
        sample_dir.mkdir(parents=True, exist_ok=True)
        psio.write_image(sample_dir / "image.png", warped_img)
        psio.write_depth(sample_dir / "depth.pfm", warped_depth)
        params = {
            "theta_deg": theta,
            "zoom": zoom,
            "seed": cfg.seed,
            "index": index,
            "compose_order": COMPOSE_ORDER,
        }
        (sample_dir / "params.json").write_text(json.dumps(params, sort_keys=True))
        written.append(sample_dir)
    return written
