#!/usr/bin/env python3
"""Walk through the coordinate conventions: ERP pixels <-> spherical angles
<-> unit vectors <-> the stereographic plane, ending with a point-cloud
export.

The ERP grid is H x 2H with pixel centers at half-integer offsets, so the
grid center is exactly longitude 0 / latitude 0 and row H/2 - 0.5 is the
equator. The stereographic pole is the equator center (1, 0, 0); its
antipode maps to the origin of the complex plane.
"""

from pathlib import Path

import numpy as np

import pansphere as ps
from pansphere import io as psio

out_dir = Path("demo_output/projections")
out_dir.mkdir(parents=True, exist_ok=True)

grid = ps.ErpGrid.from_height(252)
print(f"grid: {grid.height} x {grid.width}")

# the affine pixel <-> angle map, evaluated at landmark pixels
for u, v, label in [
    (grid.width / 2 - 0.5, grid.height / 2 - 0.5, "grid center"),
    (-0.5, -0.5, "top-left corner"),
    (grid.width - 0.5, grid.height - 0.5, "bottom-right corner"),
]:
    th, phi = ps.pixel_to_angles(u, v, grid)
    print(f"{label:>20}: pixel ({u:7.1f}, {v:6.1f}) -> "
          f"lon {np.degrees(th):7.2f} deg, lat {np.degrees(phi):6.2f} deg")

# sphere <-> plane round trip for a band of directions
th = np.radians(np.linspace(-170, 170, 13))
phi = np.radians(np.linspace(-80, 80, 13))
tt, pp = np.meshgrid(th, phi)
x, y, z = ps.sp(tt, pp)
w, at_inf = ps.stp(x, y, z)
x2, y2, z2 = ps.stp_inv(w, at_inf)
th2, phi2 = ps.sp_inv(x2, y2, z2)
err = max(np.abs(ps.wrap_longitude(th2 - tt)).max(), np.abs(phi2 - pp).max())
print(f"\nsphere -> plane -> sphere round trip over {tt.size} directions: "
      f"max angle error {err:.2e} rad")

# the pole of the projection is flagged, not turned into an IEEE infinity
_, flagged = ps.stp(1.0, 0.0, 0.0)
print(f"projection pole is flagged at-infinity: {bool(flagged)}")

# a synthetic room: radial depth from a box, exported as PLY
v, u = np.meshgrid(np.arange(grid.height), np.arange(grid.width), indexing="ij")
theta, phi = ps.pixel_to_angles(u, v, grid)
x, y, z = ps.sp(theta, phi)
# distance to an axis-aligned 4 x 6 x 3 m box around the camera
tx = 3.0 / np.maximum(np.abs(x), 1e-9)
ty = 2.0 / np.maximum(np.abs(y), 1e-9)
tz = 1.5 / np.maximum(np.abs(z), 1e-9)
depth_values = np.minimum(np.minimum(tx, ty), tz)
depth = ps.DepthMap(depth_values, np.ones_like(depth_values, bool), units="metric")

points = ps.depth_to_pointcloud(depth, grid)
psio.write_ply(out_dir / "room.ply", points)
print(f"\nwrote {points.shape[0]} points to {out_dir / 'room.ply'}")
print(f"extents: x {points[:, 0].min():+.2f}..{points[:, 0].max():+.2f}, "
      f"y {points[:, 1].min():+.2f}..{points[:, 1].max():+.2f}, "
      f"z {points[:, 2].min():+.2f}..{points[:, 2].max():+.2f} (meters)")
