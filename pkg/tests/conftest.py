import numpy as np
import pytest

import pansphere as ps


def bandlimited(H: int, channels: int = 0) -> np.ndarray:
    """Smooth low-frequency test panorama (values in [0, 1])."""
    grid = ps.ErpGrid.from_height(H)
    v, u = np.meshgrid(np.arange(H), np.arange(2 * H), indexing="ij")
    th, phi = ps.pixel_to_angles(u, v, grid)
    base = (
        0.5
        + 0.18 * np.sin(3 * th) * np.cos(2 * phi)
        + 0.12 * np.cos(2 * th + 1.0) * np.sin(phi)
        + 0.1 * np.sin(th) * np.cos(4 * phi)
    )
    if channels:
        chans = [base]
        for k in range(1, channels):
            chans.append(0.5 + 0.2 * np.cos((k + 1) * th) * np.cos(phi))
        img = np.stack(chans[:channels], axis=-1)
    else:
        img = base
    return np.clip(img, 0.0, 1.0).astype(np.float32)


def psnr(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None = None, peak: float = 1.0):
    d = (a.astype(np.float64) - b.astype(np.float64)) ** 2
    if mask is not None:
        if d.ndim == 3 and mask.ndim == 2:
            mask = np.broadcast_to(mask[:, :, None], d.shape)
        d = d[mask]
    mse = float(d.mean())
    if mse == 0:
        return np.inf
    return 10.0 * np.log10(peak * peak / mse)


def polar_cap_mask(H: int, cap_deg: float = 5.0) -> np.ndarray:
    """True outside the polar caps (|latitude| < 90 - cap_deg)."""
    grid = ps.ErpGrid.from_height(H)
    v, u = np.meshgrid(np.arange(H), np.arange(2 * H), indexing="ij")
    _, phi = ps.pixel_to_angles(u, v, grid)
    return np.abs(phi) < np.radians(90.0 - cap_deg)


def dmap(values, valid=None, units="normalized") -> ps.DepthMap:
    values = np.asarray(values, dtype=np.float64)
    if valid is None:
        valid = np.ones(values.shape, dtype=bool)
    return ps.DepthMap(values, np.asarray(valid, dtype=bool), units=units)


@pytest.fixture
def rng():
    return np.random.default_rng(20240801)
