"""Depth evaluation metrics (AbsRel, RMSE, delta thresholds) and the
transformation-sweep protocol that scores an external predictor under the
default grid of 11 vertical rotation angles in [-90, 90] deg and 10 zoom
levels in [0.4, 4.0].

Evaluation is confined to pixels where the ground truth is valid, positive,
and (when capped) at most max_depth; predictions are floored at 1e-6 before
ratio thresholds. Optional scale/shift pre-alignment runs in depth or
disparity space.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .depth import DepthMap, apply_alignment, fit_alignment
from .errors import EmptyOverlap, ShapeMismatch
from .mobius import WarpSpec, mobius_rotation, mobius_zoom, warp_depth_target, warp_erp

_PRED_FLOOR = 1e-6

DELTA_THRESHOLDS = (1.25, 1.25**2, 1.25**3)


@dataclass(frozen=True)
class MetricReport:
    """One evaluation: error metrics, threshold accuracies, and pixel count."""

    abs_rel: float
    rmse: float
    delta1: float
    delta2: float
    delta3: float
    valid_pixels: int

    def as_dict(self) -> dict:
        return {
            "abs_rel": self.abs_rel,
            "rmse": self.rmse,
            "delta1": self.delta1,
            "delta2": self.delta2,
            "delta3": self.delta3,
            "valid_pixels": self.valid_pixels,
        }


def compute_metrics(
    pred: DepthMap,
    gt: DepthMap,
    max_depth: float | None = None,
    align: str | None = None,
) -> MetricReport:
    """AbsRel, RMSE, and delta_{1.25^i} over the valid overlap.

    align may be None, "depth", or "disparity"; when set, a least-squares
    scale/shift fit in that space is applied to the prediction first.
    """
    if pred.shape != gt.shape:
        raise ShapeMismatch(f"pred {pred.shape} vs gt {gt.shape}")
    if align:
        pred = apply_alignment(pred, fit_alignment(pred, gt, space=align))
    cap = max_depth if max_depth is not None else gt.max_depth
    m = pred.valid & gt.valid & (gt.values > 0) & np.isfinite(gt.values)
    if cap is not None:
        m &= gt.values <= cap
    k = int(m.sum())
    if k == 0:
        raise EmptyOverlap("no valid pixels to evaluate")
    d = pred.values[m].astype(np.float64)
    g = gt.values[m].astype(np.float64)
    abs_rel = float(np.mean(np.abs(d - g) / g))
    rmse = float(np.sqrt(np.mean((d - g) ** 2)))
    dc = np.maximum(d, _PRED_FLOOR)
    ratio = np.maximum(dc / g, g / dc)
    deltas = [float(np.mean(ratio < t)) for t in DELTA_THRESHOLDS]
    return MetricReport(abs_rel, rmse, deltas[0], deltas[1], deltas[2], k)


def default_angles() -> list[float]:
    """11 vertical rotation angles, evenly spaced over [-90, 90] degrees."""
    return [float(a) for a in np.linspace(-90.0, 90.0, 11)]


def default_zooms() -> list[float]:
    """10 zoom levels, evenly spaced over [0.4, 4.0]."""
    return [round(float(z), 10) for z in np.linspace(0.4, 4.0, 10)]


@dataclass(frozen=True)
class SweepCell:
    """One sweep entry: transform name ("rotation" | "zoom") and its level."""

    transform: str
    level: float

    def spec(self, interpolation: str = "bilinear") -> WarpSpec:
        if self.transform == "rotation":
            return WarpSpec(mobius_rotation(np.radians(self.level)), interpolation=interpolation)
        if self.transform == "zoom":
            return WarpSpec(mobius_zoom(self.level), interpolation=interpolation)
        raise ValueError(f"unknown transform {self.transform!r}")


def sweep_cells(angles=None, zooms=None) -> list[SweepCell]:
    angles = default_angles() if angles is None else angles
    zooms = default_zooms() if zooms is None else zooms
    cells = [SweepCell("rotation", float(a)) for a in angles]
    cells += [SweepCell("zoom", float(z)) for z in zooms]
    return cells


def sweep_transformations(
    predict,
    img: np.ndarray,
    gt: DepthMap,
    angles=None,
    zooms=None,
    max_depth: float | None = None,
    align: str | None = None,
    jobs: int = 1,
):
    """Score ``predict`` on warped inputs against identically warped ground truth.

    ``predict(warped_img, cell)`` must return a DepthMap for the warped
    panorama; the same WarpSpec is applied to the ground truth, so a perfect
    predictor scores ~zero everywhere. A cell whose prediction raises is
    reported as (cell, None) and the sweep continues.

    Returns a list of (SweepCell, MetricReport | None) in grid order.
    """
    cells = sweep_cells(angles, zooms)

    def run(cell: SweepCell):
        spec = cell.spec()
        warped_img = warp_erp(img, spec)
        warped_gt = warp_depth_target(gt, spec)
        try:
            pred = predict(warped_img, cell)
            return cell, compute_metrics(pred, warped_gt, max_depth=max_depth, align=align)
        except Exception:
            return cell, None

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run, cells))
    return [run(cell) for cell in cells]
