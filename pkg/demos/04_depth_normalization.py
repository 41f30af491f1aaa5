#!/usr/bin/env python3
"""Depth preparation tools: percentile normalization into [0.01, 1],
least-squares scale/shift alignment (depth and disparity space), sky
filling, and the 2x pseudo-label upscaling step.
"""

import numpy as np

import pansphere as ps

rng = np.random.default_rng(0)

# --- percentile normalization -------------------------------------------
H = 64
metric = ps.DepthMap.from_array(rng.uniform(0.5, 12.0, (H, 2 * H)), units="metric")
d2, d98 = ps.percentile_span(metric.values[metric.valid])
norm = ps.normalize_depth(metric)
print(f"metric depth {metric.values.min():.2f}..{metric.values.max():.2f} m, "
      f"2%/98% percentiles {d2:.2f}/{d98:.2f} m")
print(f"normalized range: {norm.values[norm.valid].min():.3f}.."
      f"{norm.values[norm.valid].max():.3f} (clipped to [0.01, 1])")

# normalization is affine-invariant: meters vs millimeters, same output
mm = ps.DepthMap(metric.values * 1000.0, metric.valid, units="metric")
dev = np.abs(ps.normalize_depth(mm).values - norm.values).max()
print(f"millimeter input gives identical normalized map (max dev {dev:.1e})")

# --- scale/shift alignment ----------------------------------------------
truth = ps.DepthMap.from_array(rng.uniform(1.0, 8.0, (32, 32)), units="metric")
pred = ps.DepthMap((truth.values + 3.0) / 2.0, truth.valid, units="metric")
params = ps.fit_alignment(pred, truth, space="depth")
aligned = ps.apply_alignment(pred, params)
print(f"\naffine-invariant prediction aligned with s={params.scale:.3f}, "
      f"t={params.shift:.3f}; residual {np.abs(aligned.values - truth.values).max():.2e}")

disp_params = ps.fit_alignment(pred, truth, space="disparity")
print(f"the same fit in disparity space: s={disp_params.scale:.3f}, "
      f"t={disp_params.shift:.3f}")

# --- sky fill -------------------------------------------------------------
sky = np.zeros(norm.shape, dtype=bool)
sky[: H // 4] = True  # everything above 45 deg latitude
filled = ps.sky_fill(norm, sky)
print(f"\nsky fill: {sky.sum()} pixels set to 1.0 "
      f"(farthest normalized depth), all marked valid: {filled.valid[sky].all()}")

# --- pseudo-label upscaling ----------------------------------------------
small = rng.random((126, 252, 3)).astype(np.float32)
big = ps.upscale_for_pseudo(small, factor=2.0)
print(f"\npseudo-label prep: {small.shape} -> {big.shape} (bilinear, wraps at the seam)")
