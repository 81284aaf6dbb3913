"""Application flows built on the filter: adaptive-gain enhancement and image fusion."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .imgcore import as_float, histogram_match, luma, upsample_nearest
from .kappamap import NltParams, blur_to_feature, depth_to_feature, gompertz_kappa, mask_to_feature
from .ssfilter import UNIFORM, FilterParams, filter

SMOOTH_DEFOCUS = "smooth"
SHARPEN_DEFOCUS = "sharpen"
BLUR_MODES = (SMOOTH_DEFOCUS, SHARPEN_DEFOCUS)


@dataclass(frozen=True)
class PipelineConfig:
    """Filter and gain-map settings for one pipeline run.

    ``window``/``refine_radius``/``refine_epsilon`` drive the entropy focus
    map (blur pipeline) or the mask feathering (face pipeline).
    ``resolution_ratio`` is the MS-to-PAN pixel size ratio used for ERGAS.
    """

    filter: FilterParams
    nlt: NltParams = field(default_factory=NltParams)
    window: int = 33
    refine_radius: int = 32
    refine_epsilon: float = 0.01
    mode: str = SMOOTH_DEFOCUS
    resolution_ratio: float = 4.0
    histogram_match: bool = True

    def __post_init__(self):
        if self.mode not in BLUR_MODES:
            raise ValueError(f"mode must be one of {BLUR_MODES}, got {self.mode!r}")
        if int(self.window) != self.window or self.window < 1 or self.window % 2 == 0:
            raise ValueError(f"window must be an odd positive integer, got {self.window!r}")
        if int(self.refine_radius) != self.refine_radius or self.refine_radius < 0:
            raise ValueError(f"refine_radius must be a non-negative integer, got {self.refine_radius!r}")
        if not self.refine_epsilon > 0:
            raise ValueError("refine_epsilon must be > 0")
        if not self.resolution_ratio > 0:
            raise ValueError("resolution_ratio must be > 0")


# name -> (pipeline, description, config)
PRESETS: dict[str, tuple[str, str, PipelineConfig]] = {
    "fig4-smooth": (
        "filter",
        "self-guided smoothing, r=11 eps=0.01 kappa=0.01 s=1 (Fig. 4a)",
        PipelineConfig(FilterParams(11, 0.01, kappa=0.01, scale=1.0)),
    ),
    "fig4-sharpen": (
        "filter",
        "self-guided sharpening, r=11 eps=0.01 kappa=5 s=1 (Fig. 4d)",
        PipelineConfig(FilterParams(11, 0.01, kappa=5.0, scale=1.0)),
    ),
    "fig7": (
        "face",
        "face enhancement, r=3 eps=0.01 iters=1 kappa 0.1..5 (Fig. 7)",
        PipelineConfig(
            FilterParams(3, 0.01, scale=1.0, iterations=1),
            NltParams(kappa_min=0.1, kappa_max=5.0, growth=10.0, midpoint=0.5),
            refine_radius=4,
            refine_epsilon=0.01,
        ),
    ),
    "fig9": (
        "sdof",
        "shallow depth of field, r=3 eps=10 iters=1 kappa 0..2 (Fig. 9)",
        PipelineConfig(
            FilterParams(3, 10.0, scale=1.0, iterations=1),
            NltParams(kappa_min=0.0, kappa_max=2.0, growth=10.0, midpoint=0.5),
        ),
    ),
    "fig10": (
        "sdof",
        "shallow depth of field, r=1 eps=100 iters=10 kappa 0..2 (Fig. 10)",
        PipelineConfig(
            FilterParams(1, 100.0, scale=1.0, iterations=10),
            NltParams(kappa_min=0.0, kappa_max=2.0, growth=10.0, midpoint=0.5),
        ),
    ),
    "fig13-smooth": (
        "blur",
        "blur defocused regions, r=7 eps=0.01, entropy window 33, refine r=32 eps=0.01 (Fig. 13d)",
        PipelineConfig(
            FilterParams(7, 0.01, scale=1.0, iterations=1),
            NltParams(kappa_min=0.0, kappa_max=1.0, growth=15.0, midpoint=0.4),
            mode=SMOOTH_DEFOCUS,
        ),
    ),
    "fig13-sharpen": (
        "blur",
        "sharpen defocused regions, r=3 eps=0.01, entropy window 33, refine r=32 eps=0.01 (Fig. 13e)",
        PipelineConfig(
            FilterParams(3, 0.01, scale=1.0, iterations=1),
            NltParams(kappa_min=1.0, kappa_max=4.0, growth=15.0, midpoint=0.5),
            mode=SHARPEN_DEFOCUS,
        ),
    ),
    "gf-baseline": (
        "flashfusion",
        "plain guided filter, r=8 eps=0.004 (Fig. 16c)",
        PipelineConfig(FilterParams(8, 0.004, kappa=0.0, scale=UNIFORM, iterations=1)),
    ),
    "fig16": (
        "flashfusion",
        "iterative guided fusion, r=25 eps=1e-6 iters=10 s=1 kappa=10 (Fig. 16e)",
        PipelineConfig(FilterParams(25, 1e-6, kappa=10.0, scale=1.0, iterations=10)),
    ),
    "fig17": (
        "pansharpen",
        "pan-sharpening, r=11 eps=0.1 kappa=1.2 s=0.5 (Fig. 17c)",
        PipelineConfig(FilterParams(11, 0.1, kappa=1.2, scale=0.5, iterations=1), resolution_ratio=4.0),
    ),
}

DEFAULT_PRESET = {
    "filter": "fig4-smooth",
    "face": "fig7",
    "sdof": "fig9",
    "blur": "fig13-smooth",
    "flashfusion": "fig16",
    "pansharpen": "fig17",
}


def preset(name: str) -> PipelineConfig:
    try:
        return PRESETS[name][2]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def _check_plane(field_, img, what: str) -> np.ndarray:
    f = as_float(field_)
    if f.ndim != 2:
        raise ValueError(f"{what} must be a single plane")
    if f.shape != img.shape[:2]:
        raise ValueError(f"{what} size {f.shape} does not match image size {img.shape[:2]}")
    return f


def kappa_from_depth(depth, cfg: PipelineConfig) -> np.ndarray:
    return gompertz_kappa(depth_to_feature(depth), cfg.nlt)


def sdof(img, depth, cfg: PipelineConfig) -> np.ndarray:
    """Smooth far regions and sharpen near ones from a [0, 1] depth map (0 = nearest)."""
    img = as_float(img)
    depth = _check_plane(depth, img, "depth map")
    kappa = kappa_from_depth(depth, cfg)
    return filter(img, None, cfg.filter.with_kappa(kappa))


def kappa_from_blur(img, cfg: PipelineConfig, mode: str | None = None) -> np.ndarray:
    mode = cfg.mode if mode is None else mode
    if mode not in BLUR_MODES:
        raise ValueError(f"mode must be one of {BLUR_MODES}, got {mode!r}")
    focus = blur_to_feature(img, cfg.window, cfg.refine_radius, cfg.refine_epsilon)
    feature = focus if mode == SMOOTH_DEFOCUS else 1.0 - focus
    return gompertz_kappa(feature, cfg.nlt)


def blur_guided(img, cfg: PipelineConfig, mode: str | None = None) -> np.ndarray:
    """Defocus-adaptive processing.

    ``"smooth"`` blurs defocused regions further, ``"sharpen"`` restores them.
    The presets place the in-focus side of the transform on kappa = 1 so
    sharp regions are left alone.
    """
    img = as_float(img)
    kappa = kappa_from_blur(img, cfg, mode)
    return filter(img, None, cfg.filter.with_kappa(kappa))


def kappa_from_mask(mask, img, cfg: PipelineConfig) -> np.ndarray:
    t = mask_to_feature(mask, cfg.refine_radius, cfg.refine_epsilon, guide=img)
    return gompertz_kappa(t, cfg.nlt)


def face_enhance(img, skin_mask, cfg: PipelineConfig) -> np.ndarray:
    """Smooth the masked (skin) region gently, sharpen everything else."""
    img = as_float(img)
    mask = _check_plane(skin_mask, img, "skin mask")
    kappa = kappa_from_mask(mask, img, cfg)
    return filter(img, None, cfg.filter.with_kappa(kappa))


def flash_noflash(noflash, flash, cfg: PipelineConfig) -> np.ndarray:
    """Iterated guided filtering of the no-flash shot steered by the flash shot."""
    noflash = as_float(noflash)
    flash = as_float(flash)
    if flash.shape[:2] != noflash.shape[:2]:
        raise ValueError(f"flash {flash.shape[:2]} and no-flash {noflash.shape[:2]} differ in size")
    return filter(noflash, flash, cfg.filter)


def pansharpen(ms, pan, cfg: PipelineConfig) -> np.ndarray:
    """Upsample MS to the PAN grid, inject PAN detail band by band, then match MS histograms."""
    ms = as_float(ms)
    pan = as_float(pan)
    if pan.ndim == 3:
        pan = luma(pan)
    single = ms.ndim == 2
    if single:
        ms = ms[..., None]
    h, w = pan.shape
    if h < ms.shape[0] or w < ms.shape[1]:
        raise ValueError(f"PAN {pan.shape} is smaller than MS {ms.shape[:2]}")
    up = upsample_nearest(ms, w, h)
    params = replace(cfg.filter, color_mode="per_channel")
    fused = filter(up, pan, params)
    if cfg.histogram_match:
        fused = histogram_match(fused, ms)
    return fused[..., 0] if single else fused
