"""Edge-aware smoothing-sharpening filtering.

A single gain ``kappa`` moves the filter from edge-preserving smoothing
(``0 <= kappa < 1``) through identity (``kappa = 1``, self-guided) to
halo-free sharpening (``kappa > 1``), with optional external guidance,
per-pixel gain maps and fusion pipelines built on top.
"""

from .imgcore import (
    PatchStats,
    box_filter,
    histogram_match,
    hsv_to_rgb,
    local_entropy,
    luma,
    pad_symmetric,
    patch_stats,
    rgb_to_hsv,
    upsample_nearest,
)
from .kappamap import NltParams, blur_to_feature, depth_to_feature, gompertz_kappa, mask_to_feature
from .metrics import MetricReport, ergas, region_stats, total_variation
from .pipelines import (
    PipelineConfig,
    blur_guided,
    face_enhance,
    flash_noflash,
    pansharpen,
    preset,
    sdof,
)
from .ssfilter import (
    HSV_VALUE,
    PER_CHANNEL,
    UNIFORM,
    AlphaField,
    FilterParams,
    aggregate_guided,
    aggregate_self,
    alpha_guided,
    alpha_self,
    filter,
    filter_fixed_alpha,
    guided_filter,
    predicted_variance_ratio,
    variance_ratio,
)

__version__ = "0.1.0"

__all__ = [
    "aggregate_guided",
    "aggregate_self",
    "alpha_guided",
    "alpha_self",
    "AlphaField",
    "blur_guided",
    "blur_to_feature",
    "box_filter",
    "depth_to_feature",
    "ergas",
    "face_enhance",
    "filter",
    "filter_fixed_alpha",
    "FilterParams",
    "flash_noflash",
    "gompertz_kappa",
    "guided_filter",
    "histogram_match",
    "hsv_to_rgb",
    "HSV_VALUE",
    "local_entropy",
    "luma",
    "mask_to_feature",
    "MetricReport",
    "NltParams",
    "pad_symmetric",
    "pansharpen",
    "patch_stats",
    "PatchStats",
    "PER_CHANNEL",
    "PipelineConfig",
    "predicted_variance_ratio",
    "preset",
    "region_stats",
    "rgb_to_hsv",
    "sdof",
    "total_variation",
    "UNIFORM",
    "upsample_nearest",
    "variance_ratio",
]
