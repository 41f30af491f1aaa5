#!/usr/bin/env python3
"""The training-loss stack on synthetic predictions: scale-invariant log
loss, multi-scale gradient loss, the equator-aware patch-normalization loss
with its Gaussian sampler, and the combined supervised / semi-supervised
objectives.
"""

import numpy as np

import pansphere as ps

rng = np.random.default_rng(7)
H = 126
grid = ps.ErpGrid.from_height(H)

v, u = np.meshgrid(np.arange(H), np.arange(2 * H), indexing="ij")
th, phi = ps.pixel_to_angles(u, v, grid)
gt_values = np.clip(0.5 + 0.3 * np.sin(2 * th) * np.cos(phi), 0.01, 1.0)
gt = ps.DepthMap(gt_values, np.ones_like(gt_values, bool), units="normalized")

# a "prediction" with noise plus a global affine offset
pred_values = np.clip(0.8 * gt_values + 0.1 + rng.normal(0, 0.02, gt_values.shape), 0.01, 1.0)
pred = ps.DepthMap(pred_values, gt.valid.copy(), units="normalized")

patches = ps.sample_equator_patches(ps.SamplerConfig(seed=3), grid)
rows = [p.center[0] for p in patches]
print(f"sampled {len(patches)} patches; center rows span {min(rows)}..{max(rows)} "
      f"(equator row = {H // 2}), {sum(p.wraps_horizontally for p in patches)} wrap the seam")

silog = ps.silog_loss(pred, gt)
grad = ps.gradient_loss(pred, gt)
epnl = ps.epnl_loss(pred, gt, patches)
sup = ps.supervised_loss(pred, gt, patches)
print(f"\nSILog     = {silog:.4f}")
print(f"gradient  = {grad:.4f}")
print(f"EPNL      = {epnl:.4f}")
print(f"supervised = SILog + gradient + 5.0 * EPNL = {sup:.4f}")

# patch normalization removes per-patch affine maps entirely
affine = ps.DepthMap(np.clip(2.0 * gt_values + 0.1, 0.01, 3.0), gt.valid.copy(),
                     units="normalized")
print(f"\nEPNL(2 * gt + 0.1, gt) = {ps.epnl_loss(affine, gt, patches):.2e} "
      "(local normalization cancels affine maps)")

# semi-supervised terms: pseudo-labels, color consistency, warp consistency
teacher = gt  # stand-in for a teacher model's pseudo label
pseudo = ps.pseudo_label_loss(pred, teacher, patches)

pred_color_aug = ps.DepthMap(
    np.clip(pred_values + rng.normal(0, 0.01, pred_values.shape), 0.01, 1.0),
    gt.valid.copy(), units="normalized")
cons = ps.consistency_loss(pred_color_aug, pred)

spec = ps.draw_spec(ps.MtsaConfig(seed=1, count=1), 0)
warped_pred = ps.warp_depth_target(pred, spec)
pred_of_warped = ps.DepthMap(
    np.clip(warped_pred.values + rng.normal(0, 0.01, warped_pred.values.shape), 0.01, 1.0),
    warped_pred.valid.copy(), units="normalized")
mtsa = ps.mtsa_loss(pred_of_warped, warped_pred)

total = ps.ssl_total_loss(sup, pseudo, cons, mtsa)
print(f"\npseudo-label loss = {pseudo:.4f}")
print(f"consistency loss  = {cons:.4f}")
print(f"warp-consistency  = {mtsa:.4f}")
print(f"total = sup + pseudo + 2.0 * cons + 1.0 * mtsa = {total:.4f}")
