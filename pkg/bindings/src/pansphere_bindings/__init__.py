"""Thin array-in/array-out bindings over the pansphere toolkit for ML
training pipelines.

Every function takes plain numpy arrays (plus scalars) and returns arrays,
scalars, or small dicts, with results numerically identical to calling the
underlying library directly: non-reduced outputs are bit-identical,
reductions agree to 1e-12 relative.

Array contract: row-major contiguous float32 is consumed zero-copy. Anything
else (other dtypes, non-contiguous views, lists) is converted with exactly
one copy and a ConvertedInputWarning on the standard warnings channel.
Boolean masks follow the same rule with dtype bool. Outputs keep the dtype
semantics of the underlying operations (warps preserve the input dtype,
normalization promotes to float64).

The bindings hold no state and no caches; repeated calls with equal inputs
are bit-identical, and every function is reentrant. All evaluations are
forward-only and single-threaded, so they never oversubscribe a trainer's
worker pool; autograd is the consumer's job, validated against these
functions as a numeric oracle. Domain failures raise the library's exception
types (ShapeMismatch, EmptyOverlap, ...), which are ordinary Python
exceptions carrying those names.
"""

from __future__ import annotations

import warnings

import numpy as np

import pansphere as _ps

__version__ = _ps.__version__


class ConvertedInputWarning(UserWarning):
    """Emitted when an input array had to be copied or converted."""


def _as_f32(arr, name: str) -> np.ndarray:
    arr = np.asarray(arr)
    if arr.dtype == np.float32 and arr.flags.c_contiguous:
        return arr
    warnings.warn(
        f"{name}: converting {arr.dtype}/{'C' if arr.flags.c_contiguous else 'non-C'}"
        " input to contiguous float32 (one copy)",
        ConvertedInputWarning,
        stacklevel=3,
    )
    return np.ascontiguousarray(arr, dtype=np.float32)


def _as_mask(arr, name: str, like: np.ndarray) -> np.ndarray:
    if arr is None:
        return np.ones(like.shape[:2], dtype=bool)
    arr = np.asarray(arr)
    if arr.dtype == np.bool_ and arr.flags.c_contiguous:
        return arr
    warnings.warn(
        f"{name}: converting {arr.dtype} mask to contiguous bool (one copy)",
        ConvertedInputWarning,
        stacklevel=3,
    )
    return np.ascontiguousarray(arr, dtype=bool)


def _depthmap(values, valid, name: str, units: str = "normalized") -> _ps.DepthMap:
    v = _as_f32(values, name)
    return _ps.DepthMap(v, _as_mask(valid, name + "_valid", v), units=units)


def _spec(rotate_deg: float, zoom: float, roll_deg: float, interp: str) -> _ps.WarpSpec:
    return _ps.WarpSpec(
        mobius=_ps.compose(_ps.mobius_zoom(zoom), _ps.mobius_rotation(np.radians(rotate_deg))),
        roll=np.radians(roll_deg),
        interpolation=interp,
    )


def warp_erp(img, rotate_deg: float = 0.0, zoom: float = 1.0, roll_deg: float = 0.0,
             interp: str = "bilinear") -> np.ndarray:
    """Warp an H x W[ x C] ERP image; returns the warped array."""
    return _ps.warp_erp(_as_f32(img, "img"), _spec(rotate_deg, zoom, roll_deg, interp))


def warp_depth_target(values, valid=None, rotate_deg: float = 0.0, zoom: float = 1.0,
                      roll_deg: float = 0.0, interp: str = "bilinear"):
    """Warp a depth map; returns (warped_values, warped_valid)."""
    d = _depthmap(values, valid, "depth")
    out = _ps.warp_depth_target(d, _spec(rotate_deg, zoom, roll_deg, interp))
    return out.values, out.valid


def draw_spec(seed: int, index: int, theta_range=(-10.0, 10.0), zoom_range=(1.0, 1.5)) -> dict:
    """Deterministic augmentation parameters for (seed, index).

    Returns {"theta_deg", "zoom", "mobius": (a, b, c, d), "roll"}; feed
    theta_deg/zoom back into warp_erp / warp_depth_target as rotate_deg/zoom.
    """
    cfg = _ps.MtsaConfig(theta_range=tuple(theta_range), zoom_range=tuple(zoom_range),
                         seed=seed, count=index + 1)
    theta, zoom = _ps.draw_params(cfg, index)
    spec = _ps.spec_for(theta, zoom)
    m = spec.mobius
    return {"theta_deg": theta, "zoom": zoom, "mobius": (m.a, m.b, m.c, m.d), "roll": spec.roll}


def normalize_depth(values, valid=None):
    """Percentile normalization into [0.01, 1]; returns (values, valid)."""
    out = _ps.normalize_depth(_depthmap(values, valid, "depth", units="metric"))
    return out.values, out.valid


def _patches(patches, pred_shape, patch_count: int, seed: int):
    if patches is None:
        cfg = _ps.SamplerConfig(patch_count=patch_count, seed=seed)
        return _ps.sample_equator_patches(cfg, pred_shape)
    out = []
    for row in np.asarray(patches, dtype=np.int64):
        r, c, rows, cols = (int(x) for x in row)
        out.append(_ps.PatchSample(center=(r, c), size=(rows, cols)))
    return out


def silog_loss(pred, gt, pred_valid=None, gt_valid=None, lambda_var: float = 0.5) -> float:
    return _ps.silog_loss(_depthmap(pred, pred_valid, "pred"),
                          _depthmap(gt, gt_valid, "gt"), lambda_var=lambda_var)


def gradient_loss(pred, gt, pred_valid=None, gt_valid=None, num_scales: int = 4) -> float:
    return _ps.gradient_loss(_depthmap(pred, pred_valid, "pred"),
                             _depthmap(gt, gt_valid, "gt"), num_scales=num_scales)


def epnl_loss(pred, gt, patches=None, pred_valid=None, gt_valid=None,
              patch_count: int = 32, seed: int = 0) -> float:
    """EPNL over explicit patches ((K, 4) int rows of center_row, center_col,
    rows, cols) or over freshly sampled equator patches."""
    p = _depthmap(pred, pred_valid, "pred")
    g = _depthmap(gt, gt_valid, "gt")
    return _ps.epnl_loss(p, g, _patches(patches, p.shape, patch_count, seed))


def supervised_loss(pred, gt, patches=None, pred_valid=None, gt_valid=None,
                    patch_count: int = 32, seed: int = 0, lambda_e: float = 5.0) -> float:
    p = _depthmap(pred, pred_valid, "pred")
    g = _depthmap(gt, gt_valid, "gt")
    w = _ps.LossWeights(lambda_e=lambda_e)
    return _ps.supervised_loss(p, g, _patches(patches, p.shape, patch_count, seed), w)


def pseudo_label_loss(student_pred, teacher_pred, patches=None, student_valid=None,
                      teacher_valid=None, patch_count: int = 32, seed: int = 0,
                      lambda_e: float = 5.0) -> float:
    return supervised_loss(student_pred, teacher_pred, patches, student_valid,
                           teacher_valid, patch_count, seed, lambda_e)


def consistency_loss(pred_color_aug, pred_clean, aug_valid=None, clean_valid=None) -> float:
    return _ps.consistency_loss(_depthmap(pred_color_aug, aug_valid, "pred_aug"),
                                _depthmap(pred_clean, clean_valid, "pred_clean"))


def mtsa_loss(pred_of_warped, warped_pred, pred_valid=None, warped_valid=None) -> float:
    return _ps.mtsa_loss(_depthmap(pred_of_warped, pred_valid, "pred_of_warped"),
                         _depthmap(warped_pred, warped_valid, "warped_pred"))


def ssl_total_loss(sup: float, pseudo: float, cons: float, mtsa: float,
                   lambda_c: float = 2.0, lambda_m: float = 1.0) -> float:
    return _ps.ssl_total_loss(sup, pseudo, cons, mtsa,
                              _ps.LossWeights(lambda_c=lambda_c, lambda_m=lambda_m))


def compute_metrics(pred, gt, pred_valid=None, gt_valid=None, max_depth=None,
                    align=None) -> dict:
    """AbsRel/RMSE/delta metrics as a plain dict."""
    report = _ps.compute_metrics(
        _depthmap(pred, pred_valid, "pred", units="metric"),
        _depthmap(gt, gt_valid, "gt", units="metric"),
        max_depth=max_depth, align=align,
    )
    return report.as_dict()
