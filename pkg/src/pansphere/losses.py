"""Training losses as pure numpy reductions: scale-invariant log loss,
multi-scale gradient loss, the equator-aware patch-normalization loss (EPNL)
with its Gaussian equator sampler, and the combined supervised / pseudo-label
/ consistency / warp-consistency / total semi-supervised objectives.

No autograd here: every loss is a forward evaluation over the jointly valid
pixels, deterministic for a given seed, and exactly zero when prediction and
target agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .depth import DepthMap
from .errors import AllPatchesDegenerate, EmptyOverlap, ShapeMismatch, TooSmall

# floor for log arguments
_LOG_FLOOR = 1e-6
# a patch whose mean absolute deviation is below this is flat
_FLAT_TOL = 1e-6


@dataclass(frozen=True)
class LossWeights:
    """Loss combination weights; defaults follow the training recipe."""

    lambda_e: float = 5.0  # patch-normalization term in the supervised loss
    lambda_c: float = 2.0  # color-consistency term in the total loss
    lambda_m: float = 1.0  # warp-consistency term in the total loss

    def __post_init__(self):
        if self.lambda_e < 0 or self.lambda_c < 0 or self.lambda_m < 0:
            raise ValueError("loss weights must be >= 0")


@dataclass(frozen=True)
class SamplerConfig:
    """Equator-Gaussian patch sampler settings.

    mean_row / spread_rows default to H/2 and H/6 of the target grid;
    size_range is a fraction of H for the square patch side.
    """

    patch_count: int = 32
    mean_row: float | None = None
    spread_rows: float | None = None
    size_range: tuple[float, float] = (0.125, 0.25)
    seed: int = 0

    def __post_init__(self):
        if self.patch_count < 1:
            raise ValueError("patch_count must be >= 1")
        if self.spread_rows is not None and not self.spread_rows > 0:
            raise ValueError("spread_rows must be > 0")
        lo, hi = self.size_range
        if not (0 < lo <= hi):
            raise ValueError(f"bad size_range {self.size_range}")


@dataclass(frozen=True)
class PatchSample:
    """One sampled crop: integer center (row, col) and size (rows, cols).

    Horizontal extent may wrap modulo the image width (spherical
    continuity); the flag records whether it does. Sampler output is always
    at least 8 x 8; hand-built fixtures may be smaller.
    """

    center: tuple[int, int]
    size: tuple[int, int]
    wraps_horizontally: bool = False

    def __post_init__(self):
        if self.size[0] < 1 or self.size[1] < 1:
            raise ValueError(f"patch size must be positive, got {self.size}")


def _grid_shape(grid) -> tuple[int, int]:
    """Accept an ErpGrid or a plain (H, W) tuple; losses run on any raster."""
    if hasattr(grid, "shape"):
        return grid.shape
    return int(grid[0]), int(grid[1])


def patch_indices(sample: PatchSample, grid):
    """(row_indices, col_indices) covered by a patch; columns wrap modulo W."""
    H, W = _grid_shape(grid)
    rows_n, cols_n = sample.size
    row0 = int(np.clip(sample.center[0] - rows_n // 2, 0, max(H - rows_n, 0)))
    col0 = sample.center[1] - cols_n // 2
    rows = np.arange(row0, row0 + rows_n)
    cols = (col0 + np.arange(cols_n)) % W
    return rows, cols


def extract_patch(values: np.ndarray, sample: PatchSample, grid=None) -> np.ndarray:
    rows, cols = patch_indices(sample, grid if grid is not None else values.shape)
    return values[np.ix_(rows, cols)]


def draw_center_rows(cfg: SamplerConfig, grid, count: int | None = None, rng=None):
    """Raw Gaussian row positions, before any clamping (mean H/2, std H/6)."""
    H, _ = _grid_shape(grid)
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    n = cfg.patch_count if count is None else count
    mean = H / 2.0 if cfg.mean_row is None else cfg.mean_row
    spread = H / 6.0 if cfg.spread_rows is None else cfg.spread_rows
    return rng.normal(mean, spread, n)


def sample_equator_patches(cfg: SamplerConfig, grid) -> list[PatchSample]:
    """Draw K square patches biased towards the equator row.

    Center rows are Gaussian (mean H/2, std H/6) clamped so the patch fits
    vertically; center columns are uniform over [0, W); sides are uniform in
    size_range * H (floored at 8 px). The same seed reproduces the same
    patch list bit for bit.
    """
    H, W = _grid_shape(grid)
    rng = np.random.default_rng(cfg.seed)
    raw_rows = draw_center_rows(cfg, grid, rng=rng)
    cols = rng.uniform(0.0, W, cfg.patch_count)
    lo, hi = cfg.size_range
    sides = rng.uniform(lo * H, hi * H, cfg.patch_count)
    patches = []
    for r, c, s in zip(raw_rows, cols, sides):
        side = int(np.clip(np.rint(s), 8, H))
        half = side // 2
        row = int(np.clip(np.rint(r), half, H - side + half))
        col = int(np.rint(c)) % W
        col0 = col - side // 2
        wraps = col0 < 0 or col0 + side > W
        patches.append(
            PatchSample(center=(row, col), size=(side, side), wraps_horizontally=wraps)
        )
    return patches


def patch_normalize(values: np.ndarray, valid: np.ndarray | None = None):
    """Median / mean-absolute-deviation normalization of one patch.

    Returns (normalized, degenerate). Flat patches (deviation < 1e-6) come
    back zeroed with degenerate=True; callers drop them from patch means.
    Positive affine maps of the input normalize to identical outputs.
    """
    values = np.asarray(values, dtype=np.float64)
    if valid is None:
        valid = np.ones(values.shape, dtype=bool)
    sel = values[valid]
    if sel.size < 2:
        return np.zeros_like(values), True
    t = np.median(sel)
    s = np.mean(np.abs(sel - t))
    if s < _FLAT_TOL:
        return np.zeros_like(values), True
    out = np.zeros_like(values)
    out[valid] = (sel - t) / s
    return out, False


def silog_loss(pred: DepthMap, gt: DepthMap, lambda_var: float = 0.5) -> float:
    """Scale-invariant log loss sqrt(mean(g^2) - lambda_var * mean(g)^2),
    g = ln(pred) - ln(gt) over the valid overlap (values floored at 1e-6).

    Invariant to a common positive scale on both arguments and symmetric in
    them; zero iff pred matches gt on the overlap up to the floor.
    """
    if pred.shape != gt.shape:
        raise ShapeMismatch(f"pred {pred.shape} vs gt {gt.shape}")
    m = pred.valid & gt.valid
    if not m.any():
        raise EmptyOverlap("no jointly valid pixels")
    g = np.log(np.maximum(pred.values[m].astype(np.float64), _LOG_FLOOR)) - np.log(
        np.maximum(gt.values[m].astype(np.float64), _LOG_FLOOR)
    )
    val = np.mean(g * g) - lambda_var * np.mean(g) ** 2
    return float(np.sqrt(max(val, 0.0)))


def _downsample2(diff: np.ndarray, valid: np.ndarray):
    """2x2 block average; a block is valid only if all four sources are."""
    H, W = diff.shape
    H2, W2 = H // 2, W // 2
    d = diff[: 2 * H2, : 2 * W2].reshape(H2, 2, W2, 2)
    v = valid[: 2 * H2, : 2 * W2].reshape(H2, 2, W2, 2)
    return d.mean(axis=(1, 3)), v.all(axis=(1, 3))


def gradient_loss(pred: DepthMap, gt: DepthMap, num_scales: int = 4) -> float:
    """Multi-scale mean absolute forward-difference of the residual.

    At each of num_scales scales (x2 average-pool between scales) the term
    is mean |d_x(pred - gt)| + mean |d_y(pred - gt)| over differences whose
    two pixels are both valid. Invariant to constant offsets of either map.
    """
    if pred.shape != gt.shape:
        raise ShapeMismatch(f"pred {pred.shape} vs gt {gt.shape}")
    H, W = pred.shape
    if H < 8 or W < 8:
        raise TooSmall(f"gradient loss needs at least 8 x 8, got {H} x {W}")
    diff = pred.values.astype(np.float64) - gt.values.astype(np.float64)
    valid = pred.valid & gt.valid
    diff = np.where(valid, diff, 0.0)
    total = 0.0
    for scale in range(num_scales):
        if scale:
            diff, valid = _downsample2(diff, valid)
            if min(diff.shape) < 2:
                break
        vx = valid[:, 1:] & valid[:, :-1]
        vy = valid[1:, :] & valid[:-1, :]
        dx = np.abs(diff[:, 1:] - diff[:, :-1])[vx]
        dy = np.abs(diff[1:, :] - diff[:-1, :])[vy]
        if dx.size:
            total += float(dx.mean())
        if dy.size:
            total += float(dy.mean())
    return total


def epnl_loss(pred: DepthMap, gt: DepthMap, patches: list[PatchSample]) -> float:
    """Equator-aware patch-normalization loss.

    For each patch, both crops are median/deviation-normalized over their
    jointly valid pixels and compared by mean absolute difference; the loss
    is the mean over non-degenerate patches. Invariant to independent
    positive affine maps of prediction and target.
    """
    if pred.shape != gt.shape:
        raise ShapeMismatch(f"pred {pred.shape} vs gt {gt.shape}")
    terms = []
    for sample in patches:
        rows, cols = patch_indices(sample, pred.shape)
        sel = np.ix_(rows, cols)
        valid = pred.valid[sel] & gt.valid[sel]
        np_pred, deg_p = patch_normalize(pred.values[sel], valid)
        np_gt, deg_g = patch_normalize(gt.values[sel], valid)
        if deg_p or deg_g:
            continue
        terms.append(float(np.mean(np.abs(np_pred[valid] - np_gt[valid]))))
    if not terms:
        raise AllPatchesDegenerate("every patch was flat or empty")
    return float(np.mean(terms))


def supervised_loss(
    pred: DepthMap, gt: DepthMap, patches: list[PatchSample], weights: LossWeights = LossWeights()
) -> float:
    """SILog + gradient + lambda_e * EPNL."""
    return (
        silog_loss(pred, gt)
        + gradient_loss(pred, gt)
        + weights.lambda_e * epnl_loss(pred, gt, patches)
    )


def pseudo_label_loss(
    student_pred: DepthMap,
    teacher_pred: DepthMap,
    patches: list[PatchSample],
    weights: LossWeights = LossWeights(),
) -> float:
    """Supervised loss against the teacher's prediction as the target."""
    return supervised_loss(student_pred, teacher_pred, patches, weights)


def consistency_loss(pred_color_aug: DepthMap, pred_clean: DepthMap) -> float:
    """SILog between predictions for a color-augmented and the clean input."""
    return silog_loss(pred_color_aug, pred_clean)


def mtsa_loss(pred_of_warped: DepthMap, warped_pred: DepthMap) -> float:
    """SILog between the prediction for a warped input and the warped prediction.

    ``warped_pred`` must come from warp_depth_target with the same WarpSpec
    that produced the warped input; its invalid pixels are excluded by the
    SILog overlap mask.
    """
    return silog_loss(pred_of_warped, warped_pred)


def ssl_total_loss(
    sup: float, pseudo: float, cons: float, mtsa: float, weights: LossWeights = LossWeights()
) -> float:
    """Total objective: sup + pseudo + lambda_c * cons + lambda_m * mtsa."""
    return float(sup + pseudo + weights.lambda_c * cons + weights.lambda_m * mtsa)
