"""Coordinate conventions and projections between ERP grids, the unit sphere,
and the stereographic complex plane.

Conventions used across the whole package:

* ``theta``: longitude in radians, wrapped into [-pi, pi). ``theta = 0`` faces
  the +x axis and grows towards +y.
* ``phi``: latitude in radians in [-pi/2, pi/2]; +pi/2 is the north pole (+z).
* ERP grids are row-major H x W with W = 2H. Pixel centers sit at half-integer
  offsets, so column u covers longitude 2*pi*((u+0.5)/W - 0.5) and row v covers
  latitude pi*(0.5 - (v+0.5)/H). Row v = H/2 - 0.5 is exactly the equator.
* Unit-sphere points are (x, y, z) = (cos phi cos theta, cos phi sin theta,
  sin phi).
* The stereographic plane is the complex plane x' + 1j*y' projected from the
  pole (1, 0, 0) (the equator center); its antipode (-1, 0, 0) maps to the
  origin. The pole itself is represented by an explicit at-infinity flag,
  never by IEEE infinities.

Every function is pure, accepts scalars or numpy arrays elementwise, and is
safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .depth import DepthMap
from .errors import InvalidErpShape, InvalidUnitVector, WrongDepthUnits

TWO_PI = 2.0 * np.pi

# |1 - x| below this is treated as the projection pole.
_POLE_EPS = 1e-12
# unit-norm validation tolerance for sp_inv / stp inputs
_UNIT_TOL = 1e-6


@dataclass(frozen=True)
class ErpGrid:
    """Pixel dimensions of an equirectangular panorama (W must equal 2H)."""

    height: int
    width: int

    def __post_init__(self):
        if self.height < 2 or self.width != 2 * self.height:
            raise InvalidErpShape(
                f"ERP grid must be H x 2H with H >= 2, got {self.height} x {self.width}"
            )

    @classmethod
    def from_height(cls, height: int) -> "ErpGrid":
        return cls(height, 2 * height)

    @classmethod
    def from_shape(cls, shape) -> "ErpGrid":
        if len(shape) < 2:
            raise InvalidErpShape(f"expected at least 2 dims, got shape {shape}")
        return cls(int(shape[0]), int(shape[1]))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)


def wrap_longitude(theta):
    """Wrap longitudes into [-pi, pi)."""
    return (np.asarray(theta) + np.pi) % TWO_PI - np.pi


def pixel_to_angles(u, v, grid: ErpGrid):
    """Fractional pixel coordinates -> (theta, phi), pixel-center convention.

    The affine map is evaluated as a fraction of the grid first so that the
    grid center lands exactly on (0, 0) in floating point.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    theta = TWO_PI * ((u + 0.5) / grid.width - 0.5)
    phi = np.pi * (0.5 - (v + 0.5) / grid.height)
    return wrap_longitude(theta), phi


def angles_to_pixel(theta, phi, grid: ErpGrid):
    """Exact inverse of pixel_to_angles; u is wrapped into [-0.5, W - 0.5)."""
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    u = (theta / TWO_PI + 0.5) * grid.width - 0.5
    u = (u + 0.5) % grid.width - 0.5
    v = (0.5 - phi / np.pi) * grid.height - 0.5
    return u, v


def sp(theta, phi):
    """Angles -> unit sphere: (cos phi cos theta, cos phi sin theta, sin phi)."""
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    cp = np.cos(phi)
    return cp * np.cos(theta), cp * np.sin(theta), np.sin(phi)


def sp_inv(x, y, z, validate: bool = True):
    """Unit sphere -> angles. theta = atan2(y, x) (0 at the poles), phi = arcsin(z).

    The latitude is evaluated as atan2(z, hypot(x, y)) -- identical to
    arcsin(z) on unit vectors but without the 1/cos(phi) error blow-up near
    the poles. Raises InvalidUnitVector when the input norm deviates from 1
    by more than 1e-6 (set validate=False for inputs that are unit by
    construction).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if validate:
        err = np.abs(x * x + y * y + z * z - 1.0)
        if np.any(err > 2.0 * _UNIT_TOL):  # norm^2 tolerance ~ 2x norm tolerance
            raise InvalidUnitVector(f"max |x^2+y^2+z^2 - 1| = {float(np.max(err)):g}")
    theta = np.arctan2(y, x)
    phi = np.arctan2(z, np.hypot(x, y))
    return theta, phi


def stp(x, y, z):
    """Unit sphere -> stereographic plane from the pole (1, 0, 0).

    Returns (w, at_inf): complex coordinates x' + 1j*y' with x' = y/(1-x),
    y' = z/(1-x), and a boolean flag that is True where the input is the
    projection pole (x within 1e-12 of 1). Flagged entries hold w = 0.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    denom = 1.0 - x
    at_inf = np.abs(denom) < _POLE_EPS
    safe = np.where(at_inf, 1.0, denom)
    w = (y + 1j * z) / safe
    w = np.where(at_inf, 0.0 + 0.0j, w)
    return w, at_inf


def stp_inv(w, at_inf=None):
    """Stereographic plane -> unit sphere; the point at infinity maps to (1,0,0)."""
    w = np.asarray(w, dtype=np.complex128)
    xp = w.real
    yp = w.imag
    r2 = xp * xp + yp * yp
    denom = 1.0 + r2
    x = (r2 - 1.0) / denom
    y = 2.0 * xp / denom
    z = 2.0 * yp / denom
    if at_inf is not None:
        at_inf = np.asarray(at_inf, dtype=bool)
        x = np.where(at_inf, 1.0, x)
        y = np.where(at_inf, 0.0, y)
        z = np.where(at_inf, 0.0, z)
    return x, y, z


def erp_direction_grid(grid: ErpGrid):
    """Unit direction (x, y, z) of every pixel center, each of shape (H, W)."""
    v, u = np.meshgrid(
        np.arange(grid.height, dtype=np.float64),
        np.arange(grid.width, dtype=np.float64),
        indexing="ij",
    )
    theta, phi = pixel_to_angles(u, v, grid)
    return sp(theta, phi)


def depth_to_pointcloud(depth: DepthMap, grid: ErpGrid | None = None) -> np.ndarray:
    """Back-project a metric ERP depth map to an (N, 3) point cloud in meters.

    Each valid pixel contributes depth * direction; invalid pixels are
    omitted. Raises WrongDepthUnits for non-metric input.
    """
    if depth.units != "metric":
        raise WrongDepthUnits(f"point clouds need metric depth, got units={depth.units!r}")
    if grid is None:
        grid = ErpGrid.from_shape(depth.values.shape)
    elif grid.shape != depth.values.shape[:2]:
        raise InvalidErpShape(f"grid {grid.shape} does not match depth {depth.values.shape}")
    x, y, z = erp_direction_grid(grid)
    m = depth.valid
    d = depth.values.astype(np.float64)[m]
    pts = np.stack([d * x[m], d * y[m], d * z[m]], axis=-1)
    return pts
