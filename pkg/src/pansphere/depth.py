"""Depth-map container, percentile normalization, scale/shift alignment,
sky filling, and pseudo-label upscaling.

Depth values travel with a validity mask and a units flag:

* "metric"     -- meters, values >= 0
* "normalized" -- affine-invariant depth in [0.01, 1] (output of
  normalize_depth)
* "disparity"  -- reciprocal depth

Normalization subtracts the 2% percentile of the valid values and divides by
the 98%-2% span, then clips to [0.01, 1]. Percentiles use linear interpolation
between closest ranks on the sorted valid values, so the result is invariant
to positive affine transforms of the input.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DegenerateAlignment,
    DegenerateDepthRange,
    ShapeMismatch,
    WrongDepthUnits,
)

UNITS = ("metric", "normalized", "disparity")

NORMALIZED_MIN = 0.01
NORMALIZED_MAX = 1.0

# floor applied before any reciprocal, and to alignment outputs
_DEPTH_FLOOR = 1e-6


@dataclass
class DepthMap:
    """H x W float depth grid with a validity mask and a units flag."""

    values: np.ndarray
    valid: np.ndarray
    units: str = "metric"
    max_depth: float | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.values.ndim != 2:
            raise ShapeMismatch(f"depth values must be H x W, got shape {self.values.shape}")
        if self.valid.shape != self.values.shape:
            raise ShapeMismatch(
                f"mask shape {self.valid.shape} != values shape {self.values.shape}"
            )
        if self.units not in UNITS:
            raise WrongDepthUnits(f"unknown units {self.units!r}, expected one of {UNITS}")
        if self.valid.any() and not np.all(np.isfinite(self.values[self.valid])):
            raise ValueError("valid pixels must hold finite values")

    @classmethod
    def from_array(cls, values, units: str = "metric", max_depth: float | None = None):
        """Wrap a raw array; pixels that are non-finite or <= 0 become invalid."""
        values = np.asarray(values)
        valid = np.isfinite(values) & (values > 0)
        return cls(values, valid, units=units, max_depth=max_depth)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def copy(self) -> "DepthMap":
        return DepthMap(self.values.copy(), self.valid.copy(), self.units, self.max_depth)


@dataclass(frozen=True)
class AlignmentParams:
    """Least-squares scale/shift and the space ("depth" | "disparity") they act in."""

    scale: float
    shift: float
    space: str = "depth"

    def __post_init__(self):
        if self.space not in ("depth", "disparity"):
            raise ValueError(f"space must be 'depth' or 'disparity', got {self.space!r}")
        if not (np.isfinite(self.scale) and np.isfinite(self.shift)):
            raise ValueError("alignment parameters must be finite")


def percentile_span(values: np.ndarray, lo: float = 2.0, hi: float = 98.0):
    """(lo%, hi%) percentiles by linear interpolation on the sorted values."""
    v = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if v.size < 2:
        raise DegenerateDepthRange("need at least 2 valid depth values")
    ranks = (v.size - 1) * np.array([lo, hi]) / 100.0
    lo_i = np.floor(ranks).astype(int)
    hi_i = np.minimum(lo_i + 1, v.size - 1)
    frac = ranks - lo_i
    out = v[lo_i] * (1.0 - frac) + v[hi_i] * frac
    return float(out[0]), float(out[1])


def normalize_depth(depth: DepthMap) -> DepthMap:
    """Percentile-normalize a metric depth map into [0.01, 1].

    Valid pixels become (d - d2) / (d98 - d2) clipped to [0.01, 1]; invalid
    pixels are zeroed and stay invalid. Raises DegenerateDepthRange when the
    percentile span is below 1e-9.
    """
    vals = depth.values[depth.valid]
    d2, d98 = percentile_span(vals)
    span = d98 - d2
    if span < 1e-9:
        raise DegenerateDepthRange(f"d98 - d2 = {span:g} is too small to normalize")
    # stays float64: casting down could nudge clipped values outside [0.01, 1]
    out = np.zeros_like(depth.values, dtype=np.float64)
    out[depth.valid] = np.clip(
        (depth.values[depth.valid].astype(np.float64) - d2) / span,
        NORMALIZED_MIN,
        NORMALIZED_MAX,
    )
    return DepthMap(out, depth.valid.copy(), units="normalized", max_depth=depth.max_depth)


def _to_space(values: np.ndarray, space: str) -> np.ndarray:
    if space == "disparity":
        return 1.0 / np.maximum(values, _DEPTH_FLOOR)
    return values


def fit_alignment(pred: DepthMap, gt: DepthMap, space: str = "depth") -> AlignmentParams:
    """Closed-form least squares (s, t) minimizing sum((s*p + t - g)^2).

    The fit runs over the valid overlap, in depth values directly or in
    reciprocals when space="disparity". Raises DegenerateAlignment when the
    2x2 normal system is rank deficient (e.g. constant prediction).
    """
    if pred.shape != gt.shape:
        raise ShapeMismatch(f"pred {pred.shape} vs gt {gt.shape}")
    m = pred.valid & gt.valid
    if int(m.sum()) < 2:
        raise DegenerateAlignment("need at least 2 valid overlapping pixels")
    p = _to_space(pred.values[m].astype(np.float64), space)
    g = _to_space(gt.values[m].astype(np.float64), space)
    n = p.size
    sp_ = p.sum()
    spp = (p * p).sum()
    sg = g.sum()
    spg = (p * g).sum()
    det = n * spp - sp_ * sp_
    # det = n^2 * var(p); treat (near-)zero variance as rank deficiency
    if det <= 1e-12 * max(1.0, spp) * n:
        raise DegenerateAlignment("prediction values are (nearly) constant")
    scale = (n * spg - sp_ * sg) / det
    shift = (sg - scale * sp_) / n
    return AlignmentParams(scale=float(scale), shift=float(shift), space=space)


def apply_alignment(pred: DepthMap, params: AlignmentParams) -> DepthMap:
    """Apply s*p + t per valid pixel (through reciprocals in disparity space).

    Disparity-space alignment returns to depth via a second reciprocal.
    Results are floored at 1e-6 to keep downstream logs and ratios finite.
    """
    out = pred.values.astype(np.float64).copy()
    m = pred.valid
    p = _to_space(out[m], params.space)
    a = params.scale * p + params.shift
    a = np.maximum(a, _DEPTH_FLOOR)
    if params.space == "disparity":
        a = np.maximum(1.0 / a, _DEPTH_FLOOR)
    out[m] = a
    return DepthMap(out, pred.valid.copy(), units=pred.units, max_depth=pred.max_depth)


def sky_fill(depth: DepthMap, sky_mask: np.ndarray) -> DepthMap:
    """Set sky pixels to 1.0 (the farthest normalized depth) and mark them valid."""
    sky = np.asarray(sky_mask, dtype=bool)
    if sky.shape != depth.shape:
        raise ShapeMismatch(f"sky mask {sky.shape} vs depth {depth.shape}")
    values = depth.values.copy()
    valid = depth.valid.copy()
    values[sky] = 1.0
    valid[sky] = True
    return replace(depth, values=values, valid=valid)


def upscale_for_pseudo(img: np.ndarray, factor: float = 2.0) -> np.ndarray:
    """Bilinearly upsample an ERP image, keeping the 2:1 aspect (default x2).

    Uses the pixel-center convention (source position (u+0.5)/f - 0.5), which
    makes factor=1 an exact identity and preserves constants. Horizontal
    lookups wrap, matching the panorama's longitude periodicity.
    """
    from .resample import sample_erp  # local import to keep module deps one-way

    if factor < 1:
        raise ValueError(f"upscale factor must be >= 1, got {factor}")
    img = np.asarray(img)
    H, W = img.shape[:2]
    Hn = int(round(H * factor))
    Wn = 2 * Hn if W == 2 * H else int(round(W * factor))
    u = (np.arange(Wn, dtype=np.float64) + 0.5) * (W / Wn) - 0.5
    v = (np.arange(Hn, dtype=np.float64) + 0.5) * (H / Hn) - 0.5
    uu, vv = np.meshgrid(u, v)
    return sample_erp(img, uu, vv, mode="bilinear")
