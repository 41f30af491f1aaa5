"""Backward-mapping samplers shared by the warp and reprojection code.

ERP images are longitude-periodic, so horizontal lookups wrap modulo W while
vertical lookups clamp to the top/bottom rows. Patch images (cube faces,
tangent patches) clamp on both axes. Interpolation arithmetic runs in float64
and results are cast back to the input dtype, so bilinear outputs stay inside
the input value range.
"""

from __future__ import annotations

import numpy as np


def _gather(img: np.ndarray, vi: np.ndarray, ui: np.ndarray) -> np.ndarray:
    return img[vi, ui].astype(np.float64)


def _bilinear(img, u, v, wrap_u: bool):
    H, W = img.shape[:2]
    u0f = np.floor(u)
    v0f = np.floor(v)
    fu = u - u0f
    fv = v - v0f
    u0 = u0f.astype(np.int64)
    v0 = v0f.astype(np.int64)
    u1 = u0 + 1
    v1 = v0 + 1
    if wrap_u:
        u0 %= W
        u1 %= W
    else:
        u0 = np.clip(u0, 0, W - 1)
        u1 = np.clip(u1, 0, W - 1)
    v0 = np.clip(v0, 0, H - 1)
    v1 = np.clip(v1, 0, H - 1)
    if img.ndim == 3:
        fu = fu[..., None]
        fv = fv[..., None]
    top = (1.0 - fu) * _gather(img, v0, u0) + fu * _gather(img, v0, u1)
    bot = (1.0 - fu) * _gather(img, v1, u0) + fu * _gather(img, v1, u1)
    return (1.0 - fv) * top + fv * bot


def _nearest(img, u, v, wrap_u: bool):
    H, W = img.shape[:2]
    ui = np.rint(u).astype(np.int64)
    vi = np.rint(v).astype(np.int64)
    if wrap_u:
        ui %= W
    else:
        ui = np.clip(ui, 0, W - 1)
    vi = np.clip(vi, 0, H - 1)
    return img[vi, ui]


def sample_erp(img: np.ndarray, u, v, mode: str = "bilinear") -> np.ndarray:
    """Sample an ERP image at fractional pixels; wraps in u, clamps in v."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if mode == "nearest":
        return _nearest(img, u, v, wrap_u=True)
    if mode != "bilinear":
        raise ValueError(f"unknown interpolation mode {mode!r}")
    return _bilinear(img, u, v, wrap_u=True).astype(img.dtype, copy=False)


def sample_patch(img: np.ndarray, u, v, mode: str = "bilinear") -> np.ndarray:
    """Sample a non-periodic patch image; clamps on both axes."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if mode == "nearest":
        return _nearest(img, u, v, wrap_u=False)
    if mode != "bilinear":
        raise ValueError(f"unknown interpolation mode {mode!r}")
    return _bilinear(img, u, v, wrap_u=False).astype(img.dtype, copy=False)
