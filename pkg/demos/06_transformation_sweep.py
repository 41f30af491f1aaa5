#!/usr/bin/env python3
"""Score a predictor across the default transformation sweep: 11 vertical
rotation angles in [-90, 90] deg and 10 zoom levels in [0.4, 4.0].

Two predictors are swept: an oracle (returns the warped ground truth, so
every cell is ~zero error) and a deliberately transformation-blind one that
always answers with the unwarped prediction, which shows how the error
grows with the transformation magnitude.
"""

from pathlib import Path

import numpy as np

import pansphere as ps

out_dir = Path("demo_output/sweep")
out_dir.mkdir(parents=True, exist_ok=True)

H = 126
grid = ps.ErpGrid.from_height(H)
v, u = np.meshgrid(np.arange(H), np.arange(2 * H), indexing="ij")
th, phi = ps.pixel_to_angles(u, v, grid)
img = np.clip(np.stack([0.5 + 0.3 * np.sin(2 * th),
                        0.5 + 0.3 * np.cos(phi),
                        0.5 + 0.2 * np.sin(th + phi)], -1), 0, 1).astype(np.float32)
gt_values = np.clip(0.5 + 0.35 * np.sin(2 * th) * np.cos(phi), 0.01, 1.0)
gt = ps.DepthMap(gt_values, np.ones_like(gt_values, bool), units="normalized")


def oracle(warped_img, cell):
    return ps.warp_depth_target(gt, cell.spec())


def blind(warped_img, cell):
    return gt  # ignores the transformation entirely


def to_csv(results, path):
    lines = ["transform,level,abs_rel,rmse,delta1,delta2,delta3,valid_pixels"]
    for cell, rep in results:
        if rep is None:
            continue
        lines.append(f"{cell.transform},{cell.level:.6g},{rep.abs_rel:.6g},{rep.rmse:.6g},"
                     f"{rep.delta1:.6g},{rep.delta2:.6g},{rep.delta3:.6g},{rep.valid_pixels}")
    Path(path).write_text("\n".join(lines) + "\n")


print(f"default grid: {len(ps.default_angles())} angles {ps.default_angles()[:3]}... "
      f"and {len(ps.default_zooms())} zooms {ps.default_zooms()[:3]}...")

oracle_results = ps.sweep_transformations(oracle, img, gt)
to_csv(oracle_results, out_dir / "oracle.csv")
worst = max(rep.rmse for _, rep in oracle_results)
print(f"\noracle predictor: worst cell RMSE = {worst:.2e} (geometry self-consistency)")

blind_results = ps.sweep_transformations(blind, img, gt)
to_csv(blind_results, out_dir / "blind.csv")
print("\ntransformation-blind predictor, RMSE by rotation angle:")
for cell, rep in blind_results:
    if cell.transform == "rotation":
        bar = "#" * int(rep.rmse * 120)
        print(f"  {cell.level:+6.0f} deg  {rep.rmse:.4f}  {bar}")

print(f"\nCSV files in {out_dir}/ (columns: transform,level,abs_rel,rmse,delta1..3,pixels)")
