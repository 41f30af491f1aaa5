"""pansphere: panoramic geometry, Mobius warping, and depth evaluation.

A numpy toolkit for 2:1 equirectangular panoramas: spherical/stereographic
projections, conformal warps (vertical rotation, spherical zoom, horizontal
roll), conversions between panorama representations, affine-invariant depth
normalization and alignment, the supervised/semi-supervised depth loss
stack, evaluation metrics with a transformation-sweep protocol, and a
deterministic spatial-augmentation sampler. The ``pansphere`` CLI exposes
the same operations as file-based workflows.
"""

from .augment import (
    COMPOSE_ORDER,
    MtsaConfig,
    draw_params,
    draw_params_batch,
    draw_spec,
    generate_dataset,
    generate_pair,
    spec_for,
)
from .depth import (
    NORMALIZED_MAX,
    NORMALIZED_MIN,
    AlignmentParams,
    DepthMap,
    apply_alignment,
    fit_alignment,
    normalize_depth,
    percentile_span,
    sky_fill,
    upscale_for_pseudo,
)
from .errors import (
    AllPatchesDegenerate,
    DegenerateAlignment,
    DegenerateDepthRange,
    EmptyOverlap,
    InternalCoverageError,
    InvalidErpShape,
    InvalidMobius,
    InvalidUnitVector,
    InvalidZoom,
    NoRegionSplit,
    PansphereError,
    ShapeMismatch,
    TooSmall,
    WrongDepthUnits,
)
from .losses import (
    LossWeights,
    PatchSample,
    SamplerConfig,
    consistency_loss,
    draw_center_rows,
    epnl_loss,
    extract_patch,
    gradient_loss,
    mtsa_loss,
    patch_indices,
    patch_normalize,
    pseudo_label_loss,
    sample_equator_patches,
    silog_loss,
    ssl_total_loss,
    supervised_loss,
)
from .metrics import (
    MetricReport,
    SweepCell,
    compute_metrics,
    default_angles,
    default_zooms,
    sweep_cells,
    sweep_transformations,
)
from .mobius import (
    MobiusParams,
    WarpSpec,
    apply_mobius,
    compose,
    mobius_rotation,
    mobius_zoom,
    source_positions,
    warp_depth_target,
    warp_erp,
)
from .representations import (
    PatchSet,
    PatchSpec,
    coverage_counts,
    cube_specs,
    erp_to_cubemap,
    erp_to_hslices,
    erp_to_tangent,
    erp_to_vslices,
    gnomonic_directions,
    gnomonic_pixels,
    load_patchset,
    patchset_to_erp,
    region_masks,
    save_patchset,
    tangent_specs,
)
from .sphere import (
    ErpGrid,
    angles_to_pixel,
    depth_to_pointcloud,
    erp_direction_grid,
    pixel_to_angles,
    sp,
    sp_inv,
    stp,
    stp_inv,
    wrap_longitude,
)

__version__ = "0.1.0"
