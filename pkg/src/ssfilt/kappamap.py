"""Turn feature maps (depth, defocus, protection masks) into per-pixel gain fields."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .imgcore import as_float, local_entropy, luma
from .ssfilter import guided_filter

GOMPERTZ_B = 0.69
# entropy spread (bits) below which a map is treated as uniformly in focus
MIN_ENTROPY_SPAN = 2.0


class NltParamError(ValueError):
    pass


@dataclass(frozen=True)
class NltParams:
    """Gompertz transform settings: range [kappa_min, kappa_max], growth rate and midpoint."""

    kappa_min: float = 0.5
    kappa_max: float = 1.5
    growth: float = 10.0
    midpoint: float = 0.3

    def __post_init__(self):
        for name in ("kappa_min", "kappa_max", "growth", "midpoint"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise NltParamError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.kappa_min < 0:
            raise NltParamError("kappa_min must be >= 0")
        if self.kappa_min > self.kappa_max:
            raise NltParamError(
                f"kappa_min ({self.kappa_min}) must not exceed kappa_max ({self.kappa_max})"
            )
        if not 0.0 <= self.midpoint <= 1.0:
            raise NltParamError("midpoint must lie in [0, 1]")


def gompertz_kappa(t, params: NltParams) -> np.ndarray:
    """kappa = (kmax - kmin) * exp(-0.69 * exp(-c (t - t0))) + kmin, pointwise."""
    t = np.asarray(t, dtype=np.float64)
    with np.errstate(over="ignore"):
        inner = np.exp(-params.growth * (t - params.midpoint))
        return (params.kappa_max - params.kappa_min) * np.exp(-GOMPERTZ_B * inner) + params.kappa_min


def depth_to_feature(depth) -> np.ndarray:
    """Near pixels (small depth) map to large features: t = 1 - D."""
    d = as_float(depth)
    if d.min() < 0.0 or d.max() > 1.0:
        warnings.warn("depth map outside [0, 1]; clamping", RuntimeWarning, stacklevel=2)
        d = np.clip(d, 0.0, 1.0)
    return 1.0 - d


def _fit_radius(shape, radius: int) -> int:
    return max(0, min(int(radius), min(shape[:2]) - 1))


def focus_map(img, window: int = 33, refine_radius: int = 32, refine_epsilon: float = 0.01) -> np.ndarray:
    """Local entropy of the luma, smoothed by a guided filter steered by the luma.

    Returned in bits, unnormalised.
    """
    y = luma(img)
    window = int(window)
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd and positive, got {window}")
    ent = local_entropy(y, window)
    r = _fit_radius(y.shape, refine_radius)
    if r > 0:
        ent = guided_filter(ent, y, r, refine_epsilon)
    return ent


def blur_to_feature(img, window: int = 33, refine_radius: int = 32, refine_epsilon: float = 0.01) -> np.ndarray:
    """Focus feature in [0, 1]: about 1 where the image is sharp, about 0 where defocused.

    The refined entropy map is stretched between its 1st and 99th
    percentiles. The lower anchor is never placed closer than
    ``MIN_ENTROPY_SPAN`` bits to the upper one, so a uniformly sharp image
    stays near 1 instead of having its noise stretched to the full range.
    """
    ent = focus_map(img, window, refine_radius, refine_epsilon)
    if not np.any(ent > 0):
        return np.zeros_like(ent)
    lo, hi = np.percentile(ent, [1.0, 99.0])
    if hi <= 0:
        return np.zeros_like(ent)
    lo = min(lo, hi - MIN_ENTROPY_SPAN)
    return np.clip((ent - lo) / (hi - lo), 0.0, 1.0)


def mask_to_feature(mask, refine_radius: int = 4, refine_epsilon: float = 0.01, guide=None) -> np.ndarray:
    """Protected regions (mask = 1) map to 0, everything else to 1.

    With ``refine_radius > 0`` the step is feathered by a guided filter
    steered by ``guide`` (its luma); pass ``refine_radius=0`` for a hard edge.
    """
    m = as_float(mask)
    if m.ndim != 2:
        raise ValueError("mask must be a single plane")
    t = 1.0 - np.clip(m, 0.0, 1.0)
    if refine_radius <= 0:
        return t
    if guide is None:
        raise ValueError("feathering needs a guide image")
    g = luma(guide)
    if g.shape != t.shape:
        raise ValueError(f"mask {t.shape} and guide {g.shape} differ in size")
    r = _fit_radius(t.shape, refine_radius)
    if r == 0:
        return t
    return np.clip(guided_filter(t, g, r, refine_epsilon), 0.0, 1.0)
