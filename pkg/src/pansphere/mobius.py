"""Mobius transformations on the stereographic plane and full ERP warping.

A warp is described by Mobius coefficients (a, b, c, d) acting on the
stereographic plane as f(Z) = (aZ + b)/(cZ + d), plus a horizontal roll.
Vertical rotation by beta uses (e^{j beta}, 0, 0, 1); spherical zoom by s > 0
uses (s, 0, 0, 1); transforms compose by the 2x2 complex matrix product.

Warping is backward-mapped: every output pixel is projected to the plane,
moved by the algebraic inverse coefficients (d, -b, -c, a), projected back,
shifted by the roll, and sampled from the input (bilinear with horizontal
wrap and vertical clamp; masks always use nearest). The forward model is
therefore roll first, then the Mobius map. Horizontal rotation of a panorama
is exactly a column roll, so it is applied as a longitude offset rather than
as a third Mobius factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .depth import DepthMap
from .errors import InvalidMobius, InvalidZoom
from .resample import sample_erp
from .sphere import (
    ErpGrid,
    angles_to_pixel,
    pixel_to_angles,
    sp,
    sp_inv,
    stp,
    stp_inv,
    wrap_longitude,
)

_SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class MobiusParams:
    """Coefficients of f(Z) = (aZ + b)/(cZ + d) with ad - bc != 0."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        if abs(self.a * self.d - self.b * self.c) <= _SINGULAR_TOL:
            raise InvalidMobius(
                f"|ad - bc| = {abs(self.a * self.d - self.b * self.c):g} is singular"
            )

    @classmethod
    def identity(cls) -> "MobiusParams":
        return cls(1, 0, 0, 1)

    def inverse(self) -> "MobiusParams":
        """Algebraic inverse (d, -b, -c, a); Mobius maps ignore the det scale."""
        return MobiusParams(self.d, -self.b, -self.c, self.a)

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=np.complex128)


def mobius_rotation(beta: float) -> MobiusParams:
    """Vertical rotation by beta radians: (cos b + j sin b, 0, 0, 1)."""
    return MobiusParams(complex(np.cos(beta), np.sin(beta)), 0, 0, 1)


def mobius_zoom(s: float) -> MobiusParams:
    """Spherical zoom by level s > 0: (s, 0, 0, 1)."""
    if not s > 0:
        raise InvalidZoom(f"zoom level must be > 0, got {s}")
    return MobiusParams(complex(s), 0, 0, 1)


def compose(m2: MobiusParams, m1: MobiusParams) -> MobiusParams:
    """Matrix chain rule: applying the result equals applying m1 then m2."""
    p = m2.matrix() @ m1.matrix()
    return MobiusParams(p[0, 0], p[0, 1], p[1, 0], p[1, 1])


def apply_mobius(m: MobiusParams, w, at_inf=None):
    """Evaluate f(Z) elementwise on the extended plane.

    Returns (values, at_inf). Finite points with cZ + d = 0 map to infinity;
    the point at infinity maps to a/c (or stays at infinity when c = 0).
    Flagged entries hold value 0.
    """
    w = np.asarray(w, dtype=np.complex128)
    if at_inf is None:
        at_inf = np.zeros(w.shape, dtype=bool)
    else:
        at_inf = np.asarray(at_inf, dtype=bool)
    denom = m.c * w + m.d
    blow_up = (denom == 0) & ~at_inf
    safe = np.where(blow_up, 1.0, denom)
    out = (m.a * w + m.b) / safe
    if m.c == 0:
        out_inf = at_inf | blow_up
    else:
        out = np.where(at_inf, m.a / m.c, out)
        out_inf = blow_up
    out = np.where(out_inf, 0.0 + 0.0j, out)
    return out, out_inf


@dataclass(frozen=True)
class WarpSpec:
    """A full spherical warp: Mobius coefficients + horizontal roll + sampling mode."""

    mobius: MobiusParams = field(default_factory=MobiusParams.identity)
    roll: float = 0.0
    interpolation: str = "bilinear"

    def __post_init__(self):
        if self.interpolation not in ("bilinear", "nearest"):
            raise ValueError(f"interpolation must be bilinear|nearest, got {self.interpolation!r}")
        object.__setattr__(self, "roll", float(wrap_longitude(self.roll)))


def source_positions(grid: ErpGrid, spec: WarpSpec):
    """Backward-map every output pixel center to its input sampling position.

    Returns (u_src, v_src, invalid), each (H, W). ``invalid`` marks samples
    that landed on the stereographic point at infinity.
    """
    v, u = np.meshgrid(
        np.arange(grid.height, dtype=np.float64),
        np.arange(grid.width, dtype=np.float64),
        indexing="ij",
    )
    theta, phi = pixel_to_angles(u, v, grid)
    x, y, z = sp(theta, phi)
    w, at_inf = stp(x, y, z)
    w, at_inf = apply_mobius(spec.mobius.inverse(), w, at_inf)
    xs, ys, zs = stp_inv(w, at_inf)
    theta_s, phi_s = sp_inv(xs, ys, zs, validate=False)
    theta_s = theta_s - spec.roll
    u_src, v_src = angles_to_pixel(theta_s, phi_s, grid)
    return u_src, v_src, at_inf


def warp_erp(img, spec: WarpSpec):
    """Warp an ERP image array or a DepthMap through the spec.

    Arrays come back as arrays; DepthMaps keep their units and get their
    validity mask warped with nearest-neighbor sampling. Raises
    InvalidErpShape for non-2:1 input.
    """
    if isinstance(img, DepthMap):
        return warp_depth_target(img, spec)
    img = np.asarray(img)
    grid = ErpGrid.from_shape(img.shape)
    u_src, v_src, bad = source_positions(grid, spec)
    out = sample_erp(img, u_src, v_src, mode=spec.interpolation)
    if bad.any():
        out = out.copy()
        out[bad] = 0
    return out


def warp_depth_target(depth: DepthMap, spec: WarpSpec) -> DepthMap:
    """Warp a depth map to build the consistency target for a warped input.

    Values are resampled as plain scalars (no metric reprojection); the
    output mask is the input mask warped with nearest sampling, minus any
    point-at-infinity samples.
    """
    grid = ErpGrid.from_shape(depth.values.shape)
    u_src, v_src, bad = source_positions(grid, spec)
    values = sample_erp(depth.values, u_src, v_src, mode=spec.interpolation)
    valid = sample_erp(depth.valid, u_src, v_src, mode="nearest") & ~bad
    values = values.copy()
    values[~valid] = 0
    return DepthMap(values, valid, units=depth.units, max_depth=depth.max_depth)
