"""Command-line surface: file-based workflows over the library.

Subcommands: warp, reproject, eval, sweep, augment, normalize, skyfill,
upscale, losses eval, pointcloud. Every run is deterministic given its
inputs, flags, and seed, and records exactly one run manifest (tool version,
command line, seed, input/output content digests): file-producing commands
write ``<output>.manifest.json`` (or ``run_manifest.json`` inside output
directories); stdout-emitting commands embed it under the "manifest" key.

Exit codes: 0 success, 1 I/O or usage error, 2 domain error. Errors are
mirrored as one-line JSON on stderr. Numeric output uses 6 significant
digits with a dot decimal separator.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import shlex
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from . import io as psio
from .augment import MtsaConfig, generate_dataset
from .depth import DepthMap, normalize_depth, sky_fill, upscale_for_pseudo
from .errors import PansphereError
from .losses import (
    LossWeights,
    SamplerConfig,
    epnl_loss,
    gradient_loss,
    sample_equator_patches,
    silog_loss,
    supervised_loss,
)
from .metrics import compute_metrics, sweep_transformations
from .mobius import WarpSpec, compose, mobius_rotation, mobius_zoom, warp_depth_target, warp_erp
from .representations import (
    erp_to_cubemap,
    erp_to_hslices,
    erp_to_tangent,
    erp_to_vslices,
    load_patchset,
    patchset_to_erp,
    save_patchset,
)
from .sphere import ErpGrid, depth_to_pointcloud

_REPR_NAMES = {"cp": "cube", "tp": "tangent", "hs": "hslice", "vs": "vslice"}
_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the spec reserves 2 for domain errors."""

    def error(self, message):
        _emit_error("UsageError", message)
        raise SystemExit(1)


def _emit_error(name: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": name, "message": message}) + "\n")


def _sig6(x: float) -> float:
    return float(f"{float(x):.6g}")


def _digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _collect_files(path: Path) -> list[Path]:
    if path.is_dir():
        return sorted(p for p in path.rglob("*") if p.is_file())
    return [path]


def _manifest(argv, inputs, outputs, seed=None, extra=None) -> dict:
    man = {
        "tool": "pansphere",
        "version": __version__,
        "command": list(argv),
        "seed": seed,
        "inputs": {
            str(p): _digest(p) for inp in inputs for p in _collect_files(Path(inp))
        },
        "outputs": {
            str(p): _digest(p) for out in outputs for p in _collect_files(Path(out))
        },
    }
    if extra:
        man.update(extra)
    return man


def _write_manifest(argv, inputs, outputs, seed=None, extra=None) -> None:
    man = _manifest(argv, inputs, outputs, seed=seed, extra=extra)
    primary = Path(outputs[0])
    if primary.is_dir():
        path = primary / "run_manifest.json"
        man["outputs"].pop(str(path), None)
    else:
        path = Path(str(primary) + ".manifest.json")
    path.write_text(json.dumps(man, indent=2, sort_keys=True))


def _print_json(doc: dict, output: str | None, argv, inputs, seed=None) -> None:
    """Emit a JSON document with its manifest (embedded, or as a sidecar file)."""
    if output:
        Path(output).write_text(json.dumps(doc, indent=2, sort_keys=True))
        _write_manifest(argv, inputs, [output], seed=seed)
    else:
        doc = dict(doc)
        doc["manifest"] = _manifest(argv, inputs, [], seed=seed)
    sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _is_image(path: Path) -> bool:
    return path.suffix.lower() in _IMAGE_SUFFIXES and not _looks_like_depth_png(path)


def _looks_like_depth_png(path: Path) -> bool:
    return path.suffix.lower() == ".png" and path.with_suffix(".json").exists()


def _load_depth(path: Path, units: str | None = None) -> DepthMap:
    return psio.read_depth(path, units=units)


# ---------------------------------------------------------------- warp


def _cmd_warp(args, argv) -> int:
    inp = Path(args.input)
    spec = WarpSpec(
        mobius=compose(mobius_zoom(args.zoom), mobius_rotation(np.radians(args.rotate_deg))),
        roll=np.radians(args.roll_deg),
        interpolation=args.interp,
    )
    if _is_image(inp):
        img = psio.read_image(inp)
        ErpGrid.from_shape(img.shape)  # validates 2:1 aspect
        psio.write_image(args.output, warp_erp(img, spec))
    else:
        depth = _load_depth(inp)
        ErpGrid.from_shape(depth.shape)
        psio.write_depth(args.output, warp_depth_target(depth, spec))
    _write_manifest(argv, [args.input], [args.output])
    return 0


# ---------------------------------------------------------------- reproject


def _cmd_reproject(args, argv) -> int:
    src, dst = args.from_, args.to
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if src == "erp":
        kind = _REPR_NAMES[dst]
        img = psio.read_image(args.input)
        to_patches = {
            "cube": erp_to_cubemap,
            "tangent": erp_to_tangent,
            "hslice": erp_to_hslices,
            "vslice": erp_to_vslices,
        }[kind]
        save_patchset(to_patches(img), out_dir)
    else:
        ps = load_patchset(args.input)
        erp = patchset_to_erp(ps)
        if erp.ndim == 3:
            psio.write_image(out_dir / "erp.png", erp)
        else:
            psio.write_pfm(out_dir / "erp.pfm", erp)
    _write_manifest(argv, [args.input], [str(out_dir)])
    return 0


# ---------------------------------------------------------------- eval


def _cmd_eval(args, argv) -> int:
    pred = _load_depth(Path(args.pred))
    gt = _load_depth(Path(args.gt))
    align = None if args.align == "none" else args.align
    report = compute_metrics(pred, gt, max_depth=args.max_depth, align=align)
    doc = {k: (_sig6(v) if isinstance(v, float) else v) for k, v in report.as_dict().items()}
    _print_json(doc, args.output, argv, [args.pred, args.gt])
    return 0


# ---------------------------------------------------------------- sweep


def _cmd_pred_from_dir(pred_dir: Path, cell):
    name = f"{cell.transform}_{cell.level:g}.pfm"
    return psio.read_depth(pred_dir / name, units="normalized")


def _cmd_pred_from_cmd(template: str, warped_img, cell, workdir: Path):
    img_path = workdir / f"in_{cell.transform}_{cell.level:g}.png"
    out_path = workdir / f"out_{cell.transform}_{cell.level:g}.pfm"
    psio.write_image(img_path, warped_img)
    tokens = shlex.split(template)
    if any("{input}" in t or "{output}" in t for t in tokens):
        tokens = [t.replace("{input}", str(img_path)).replace("{output}", str(out_path))
                  for t in tokens]
    else:
        tokens += [str(img_path), str(out_path)]
    subprocess.run(tokens, check=True, capture_output=True)
    return psio.read_depth(out_path, units="normalized")


def _parse_levels(text: str | None, default):
    if text is None:
        return default
    return [float(tok) for tok in text.replace(",", " ").split()]


def _cmd_sweep(args, argv) -> int:
    img = psio.read_image(args.image)
    gt = _load_depth(Path(args.gt), units="normalized")
    align = None if args.align == "none" else args.align
    angles = _parse_levels(args.angles, None)
    zooms = _parse_levels(args.zooms, None)

    with tempfile.TemporaryDirectory(prefix="pansphere_sweep_") as tmp:
        if args.pred_dir:
            pred_dir = Path(args.pred_dir)

            def predict(warped, cell):
                return _cmd_pred_from_dir(pred_dir, cell)

        else:
            workdir = Path(tmp)

            def predict(warped, cell):
                return _cmd_pred_from_cmd(args.pred_cmd, warped, cell, workdir)

        results = sweep_transformations(
            predict, img, gt, angles=angles, zooms=zooms,
            max_depth=args.max_depth, align=align, jobs=args.jobs,
        )

    lines = ["transform,level,abs_rel,rmse,delta1,delta2,delta3,valid_pixels"]
    missing = []
    for cell, report in results:
        if report is None:
            missing.append(f"{cell.transform}_{cell.level:g}")
            continue
        lines.append(
            f"{cell.transform},{cell.level:.6g},{report.abs_rel:.6g},{report.rmse:.6g},"
            f"{report.delta1:.6g},{report.delta2:.6g},{report.delta3:.6g},{report.valid_pixels}"
        )
    Path(args.output).write_text("\n".join(lines) + "\n")
    _write_manifest(
        argv, [args.image, args.gt], [args.output],
        extra={"align": args.align, "missing_cells": missing},
    )
    if missing:
        _emit_error("PredictorFailure", f"{len(missing)} cell(s) missing: {missing}")
        return 1
    return 0


# ---------------------------------------------------------------- augment


def _cmd_augment(args, argv) -> int:
    image_dir = Path(args.image_dir)
    pseudo_dir = Path(args.pseudo_dir)
    images = sorted(p for p in image_dir.iterdir() if p.suffix.lower() in _IMAGE_SUFFIXES)
    if not images:
        raise FileNotFoundError(f"no images found in {image_dir}")
    inputs = []
    for img_path in images:
        depth_path = pseudo_dir / (img_path.stem + ".pfm")
        if not depth_path.exists():
            raise FileNotFoundError(f"missing pseudo depth {depth_path} for {img_path.name}")
        inputs.append((psio.read_image(img_path), psio.read_depth(depth_path, units="normalized")))
    cfg = MtsaConfig(
        theta_range=tuple(args.theta_range),
        zoom_range=tuple(args.zoom_range),
        seed=args.seed,
        count=args.count,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    generate_dataset(inputs, out_dir, cfg)
    _write_manifest(argv, [str(image_dir), str(pseudo_dir)], [str(out_dir)], seed=args.seed)
    return 0


# ---------------------------------------------------------------- small wrappers


def _cmd_normalize(args, argv) -> int:
    depth = _load_depth(Path(args.input))
    psio.write_depth(args.output, normalize_depth(depth))
    _write_manifest(argv, [args.input], [args.output])
    return 0


def _cmd_skyfill(args, argv) -> int:
    depth = _load_depth(Path(args.input), units="normalized")
    mask = psio.read_mask(args.mask)
    psio.write_depth(args.output, sky_fill(depth, mask))
    _write_manifest(argv, [args.input, args.mask], [args.output])
    return 0


def _cmd_upscale(args, argv) -> int:
    inp = Path(args.input)
    if _is_image(inp):
        psio.write_image(args.output, upscale_for_pseudo(psio.read_image(inp), args.factor))
    else:
        depth = _load_depth(inp)
        values = upscale_for_pseudo(depth.values, args.factor)
        psio.write_pfm(args.output, values)
    _write_manifest(argv, [args.input], [args.output])
    return 0


def _cmd_losses_eval(args, argv) -> int:
    pred = _load_depth(Path(args.pred), units="normalized")
    gt = _load_depth(Path(args.gt), units="normalized")
    cfg = SamplerConfig(patch_count=args.patch_count, seed=args.seed)
    patches = sample_equator_patches(cfg, pred.shape)
    weights = LossWeights(lambda_e=args.lambda_e)
    doc = {
        "silog": _sig6(silog_loss(pred, gt)),
        "gradient": _sig6(gradient_loss(pred, gt)),
        "epnl": _sig6(epnl_loss(pred, gt, patches)),
        "supervised": _sig6(supervised_loss(pred, gt, patches, weights)),
        "lambda_e": weights.lambda_e,
        "patch_count": cfg.patch_count,
        "seed": cfg.seed,
    }
    _print_json(doc, args.output, argv, [args.pred, args.gt], seed=args.seed)
    return 0


def _cmd_pointcloud(args, argv) -> int:
    depth = _load_depth(Path(args.input), units=args.units)
    points = depth_to_pointcloud(depth)
    psio.write_ply(args.output, points)
    _write_manifest(argv, [args.input], [args.output])
    return 0


# ---------------------------------------------------------------- parser


def _build_parser() -> _Parser:
    parser = _Parser(prog="pansphere", description=__doc__)
    parser.add_argument("--version", action="version", version=f"pansphere {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("warp", help="warp an ERP image or depth map")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--rotate-deg", type=float, default=0.0, help="vertical rotation angle")
    p.add_argument("--zoom", type=float, default=1.0, help="spherical zoom level (> 0)")
    p.add_argument("--roll-deg", type=float, default=0.0, help="horizontal roll")
    p.add_argument("--interp", choices=("bilinear", "nearest"), default="bilinear")
    p.set_defaults(func=_cmd_warp)

    p = sub.add_parser("reproject", help="convert between ERP and patch representations")
    p.add_argument("--from", dest="from_", required=True, choices=("erp", "cp", "tp", "hs", "vs"))
    p.add_argument("--to", required=True, choices=("erp", "cp", "tp", "hs", "vs"))
    p.add_argument("--input", required=True, help="ERP image, or patchset directory")
    p.add_argument("--output-dir", required=True)
    p.set_defaults(func=_cmd_reproject)

    p = sub.add_parser("eval", help="depth metrics between prediction and ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--max-depth", type=float, default=None)
    p.add_argument("--align", choices=("none", "depth", "disparity"), default="none")
    p.add_argument("--output", default=None, help="write report JSON here instead of stdout")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", help="evaluate a predictor across rotations and zooms")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--pred-cmd", help="command template; gets input PNG and output PFM paths")
    group.add_argument("--pred-dir", help="directory of <transform>_<level>.pfm predictions")
    p.add_argument("--image", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--angles", default=None, help="rotation degrees (default: 11 in [-90, 90])")
    p.add_argument("--zooms", default=None, help="zoom levels (default: 10 in [0.4, 4.0])")
    p.add_argument("--max-depth", type=float, default=None)
    p.add_argument("--align", choices=("none", "depth", "disparity"), default="none")
    p.add_argument("--output", required=True, help="CSV output path")
    p.add_argument("--jobs", type=int, default=int(os.environ.get("PANSPHERE_JOBS", "1")))
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("augment", help="generate warped (image, pseudo-depth) training pairs")
    p.add_argument("--image-dir", required=True)
    p.add_argument("--pseudo-dir", required=True, help="matching <stem>.pfm pseudo labels")
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta-range", type=float, nargs=2, default=(-10.0, 10.0),
                   metavar=("LO", "HI"))
    p.add_argument("--zoom-range", type=float, nargs=2, default=(1.0, 1.5),
                   metavar=("LO", "HI"))
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("normalize", help="percentile-normalize a metric depth map")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_normalize)

    p = sub.add_parser("skyfill", help="set sky pixels of a normalized depth map to 1.0")
    p.add_argument("--input", required=True)
    p.add_argument("--mask", required=True, help="8-bit PNG, nonzero = sky")
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_skyfill)

    p = sub.add_parser("upscale", help="bilinear ERP upsampling (pseudo-label prep)")
    p.add_argument("--input", required=True)
    p.add_argument("--factor", type=float, default=2.0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_upscale)

    p = sub.add_parser("losses", help="loss evaluations")
    losses_sub = p.add_subparsers(dest="losses_command", required=True, parser_class=_Parser)
    pe = losses_sub.add_parser("eval", help="evaluate the supervised loss stack")
    pe.add_argument("--pred", required=True)
    pe.add_argument("--gt", required=True)
    pe.add_argument("--patch-count", type=int, default=32)
    pe.add_argument("--seed", type=int, default=0)
    pe.add_argument("--lambda-e", type=float, default=5.0)
    pe.add_argument("--output", default=None)
    pe.set_defaults(func=_cmd_losses_eval)

    p = sub.add_parser("pointcloud", help="export a metric depth map as a PLY point cloud")
    p.add_argument("--input", required=True)
    p.add_argument("--units", default="metric", choices=("metric", "normalized", "disparity"))
    p.add_argument("--output", required=True)
    p.set_defaults(func=_cmd_pointcloud)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors exit 1, --help/--version exit 0
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except PansphereError as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 2
    except (OSError, ValueError, subprocess.SubprocessError) as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
