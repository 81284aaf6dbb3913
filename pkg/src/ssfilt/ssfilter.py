"""Edge-aware smoothing-sharpening filter.

Every pixel belongs to N = (2r+1)^2 overlapping square patches. On each
patch the output is modelled as an interpolation between the pixel and the
patch mean, ``J_k(q) = alpha_k I(q) + (1 - alpha_k) mu_k``, with ``alpha_k``
chosen as the MAP estimate under a Gaussian likelihood and a generalised
Gamma prior. A single gain ``kappa`` selects the regime:

* ``0 <= kappa < 1``: edge-preserving smoothing (``kappa = 0`` is the
  classic guided filter),
* ``kappa = 1``: identity for the self-guided form,
* ``kappa > 1``: sharpening whose gain shrinks on high-variance patches, so
  strong edges do not ring.

With an external guide ``G`` the Laplacian of ``G`` replaces that of ``I``
and the per-patch gain carries the sign of the I/G covariance. The per-patch
estimates are merged with variance-dependent weights.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .imgcore import PatchStats, as_float, box_filter, hsv_to_rgb, patch_stats, rgb_to_hsv

UNIFORM = "uniform"
PER_CHANNEL = "per_channel"
HSV_VALUE = "hsv_value"
COLOR_MODES = (PER_CHANNEL, HSV_VALUE)

VARIANCE_FLOOR = 1e-12


class FilterParamError(ValueError):
    pass


@dataclass(frozen=True)
class FilterParams:
    """Filter configuration.

    Parameters
    ----------
    radius : int
        Patch radius r; patches hold (2r+1)^2 pixels.
    epsilon : float
        Regulariser (strictly positive).
    kappa : float or ndarray
        Smoothing/sharpening gain, a scalar or a per-pixel field.
    scale : float or ``UNIFORM``
        Weight scale s. ``UNIFORM`` gives every patch the weight 1/N, which
        reproduces the original guided filter aggregation.
    iterations : int
        Number of passes; each pass re-derives statistics from its input.
    color_mode : str
        ``"per_channel"`` or ``"hsv_value"`` (filter only V of HSV).
    """

    radius: int
    epsilon: float
    kappa: float | np.ndarray = 1.0
    scale: float | str = 1.0
    iterations: int = 1
    color_mode: str = PER_CHANNEL

    def __post_init__(self):
        if isinstance(self.radius, bool) or int(self.radius) != self.radius or self.radius < 0:
            raise FilterParamError(f"radius must be a non-negative integer, got {self.radius!r}")
        object.__setattr__(self, "radius", int(self.radius))
        eps = float(self.epsilon)
        if not np.isfinite(eps) or eps <= 0:
            raise FilterParamError(f"epsilon must be > 0, got {self.epsilon!r}")
        object.__setattr__(self, "epsilon", eps)

        if np.ndim(self.kappa) == 0:
            k = float(self.kappa)
            if not np.isfinite(k) or k < 0:
                raise FilterParamError(f"kappa must be finite and >= 0, got {self.kappa!r}")
            object.__setattr__(self, "kappa", k)
        else:
            k = np.asarray(self.kappa, dtype=np.float64)
            if k.ndim != 2:
                raise FilterParamError("a kappa field must be a single 2-D plane")
            if not np.all(np.isfinite(k)) or np.any(k < 0):
                raise FilterParamError("kappa field must be finite and >= 0 everywhere")
            object.__setattr__(self, "kappa", k)

        if isinstance(self.scale, str):
            if self.scale != UNIFORM:
                raise FilterParamError(f"scale must be positive or {UNIFORM!r}, got {self.scale!r}")
        else:
            s = float(self.scale)
            if not np.isfinite(s) or s <= 0:
                raise FilterParamError(f"scale must be > 0, got {self.scale!r}")
            object.__setattr__(self, "scale", s)

        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise FilterParamError(f"iterations must be an integer >= 1, got {self.iterations!r}")
        object.__setattr__(self, "iterations", int(self.iterations))
        if self.color_mode not in COLOR_MODES:
            raise FilterParamError(f"color_mode must be one of {COLOR_MODES}, got {self.color_mode!r}")

    @property
    def uniform_weights(self) -> bool:
        return isinstance(self.scale, str)

    def with_kappa(self, kappa) -> "FilterParams":
        return replace(self, kappa=kappa)


@dataclass(frozen=True)
class AlphaField:
    alpha: np.ndarray
    a: np.ndarray
    beta: np.ndarray | None = None

    @property
    def gain(self) -> np.ndarray:
        """Sharpening gain alpha - 1 (negative in the smoothing regime)."""
        return self.alpha - 1.0


def _kappa_plane(params: FilterParams, shape) -> np.ndarray | float:
    k = params.kappa
    if isinstance(k, np.ndarray):
        if k.shape != tuple(shape):
            raise FilterParamError(f"kappa field {k.shape} does not match image plane {tuple(shape)}")
    return k


def alpha_self(sigma2, params: FilterParams) -> AlphaField:
    """MAP interpolation weight for the self-guided patch model."""
    sigma2 = np.asarray(sigma2, dtype=np.float64)
    kappa = _kappa_plane(params, sigma2.shape)
    a = sigma2 / (sigma2 + params.epsilon)
    alpha = 0.5 * (a + np.sqrt(a * a + 4.0 * kappa * (1.0 - a)))
    return AlphaField(alpha=alpha, a=a)


def alpha_guided(stats: PatchStats, params: FilterParams) -> AlphaField:
    """MAP gain for the externally guided model, with the covariance sign applied to beta."""
    kappa = _kappa_plane(params, stats.phi.shape)
    denom = stats.varsigma2 + params.epsilon
    a = stats.phi / denom
    alpha = 0.5 * (np.abs(a) + np.sqrt(a * a + 4.0 * kappa * params.epsilon / denom))
    beta = np.sign(stats.phi) * alpha
    return AlphaField(alpha=alpha, a=a, beta=beta)


def patch_weights(variance, params: FilterParams) -> np.ndarray:
    """Unnormalised aggregation weights 1 / (1 + (var / (s * mean(var)))^2).

    Normalisation happens per pixel during aggregation. A field with zero
    mean variance (a constant plane) gets equal weights.
    """
    variance = np.asarray(variance, dtype=np.float64)
    if params.uniform_weights:
        return np.ones_like(variance)
    mean_var = float(np.mean(variance))
    if mean_var <= 0.0:
        return np.ones_like(variance)
    z = variance / (params.scale * mean_var)
    return 1.0 / (1.0 + z * z)


def aggregate_self(I, field: AlphaField, mu, sigma2, params: FilterParams, weights=None) -> np.ndarray:
    I = as_float(I)
    r = params.radius
    w = patch_weights(sigma2, params) if weights is None else np.asarray(weights, dtype=np.float64)
    nor = box_filter(w, r)
    A = box_filter(field.alpha * w, r)
    B = box_filter((1.0 - field.alpha) * mu * w, r)
    return (I * A + B) / nor


def aggregate_guided(G, field: AlphaField, stats: PatchStats, params: FilterParams, weights=None) -> np.ndarray:
    G = as_float(G)
    if field.beta is None:
        raise ValueError("guided aggregation needs the signed gain beta")
    r = params.radius
    w = patch_weights(stats.varsigma2, params) if weights is None else np.asarray(weights, dtype=np.float64)
    nor = box_filter(w, r)
    A = box_filter(field.beta * w, r)
    B = box_filter((stats.mu - field.beta * stats.nu) * w, r)
    return (G * A + B) / nor


def filter_plane(I: np.ndarray, G: np.ndarray | None, params: FilterParams) -> np.ndarray:
    """One pass over a single plane; ``G=None`` selects self-guidance."""
    if G is None:
        stats = patch_stats(I, I, params.radius)
        field = alpha_self(stats.sigma2, params)
        return aggregate_self(I, field, stats.mu, stats.sigma2, params)
    stats = patch_stats(I, G, params.radius)
    field = alpha_guided(stats, params)
    return aggregate_guided(G, field, stats, params)


def _iterate(I: np.ndarray, G: np.ndarray | None, params: FilterParams) -> np.ndarray:
    J = I
    for _ in range(params.iterations):
        J = filter_plane(J, G, params)
    return J


def worker_count() -> int:
    raw = os.environ.get("SSFILT_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise FilterParamError(f"SSFILT_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise FilterParamError("SSFILT_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def _run_planes(jobs) -> list[np.ndarray]:
    workers = min(worker_count(), len(jobs))
    if workers <= 1:
        return [_iterate(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: _iterate(*job), jobs))


def _split_guide(G: np.ndarray | None, channels: int) -> list[np.ndarray | None]:
    if G is None:
        return [None] * channels
    if G.ndim == 2:
        return [G] * channels
    if G.shape[2] == 1:
        return [G[..., 0]] * channels
    if G.shape[2] != channels:
        raise ValueError(f"guide has {G.shape[2]} channels, image has {channels}")
    return [G[..., c] for c in range(channels)]


def _value_plane(img: np.ndarray) -> np.ndarray:
    return img if img.ndim == 2 else img[..., :3].max(axis=2)


def filter(I, G=None, params: FilterParams | None = None) -> np.ndarray:
    """Apply the smoothing-sharpening filter to an image.

    Parameters
    ----------
    I : ndarray
        ``(H, W)`` or ``(H, W, C)`` image.
    G : ndarray, optional
        Guide image with the same height and width. ``None`` means
        self-guidance. A single-plane guide is shared by all channels;
        otherwise channel ``c`` of ``I`` is paired with channel ``c`` of ``G``.
    params : FilterParams

    Returns
    -------
    ndarray
        Same shape as ``I``, float64, not clamped.
    """
    if params is None:
        raise FilterParamError("filter parameters are required")
    I = as_float(I)
    if I.ndim == 1:
        raise ValueError("filter expects a 2-D image")
    if G is not None:
        G = as_float(G)
        if G.shape[:2] != I.shape[:2]:
            raise ValueError(f"guide size {G.shape[:2]} differs from image size {I.shape[:2]}")
    _kappa_plane(params, I.shape[:2])

    if I.ndim == 2:
        return _iterate(I, None if G is None else (G if G.ndim == 2 else _split_guide(G, 1)[0]), params)

    channels = I.shape[2]
    if params.color_mode == HSV_VALUE:
        if channels not in (3, 4):
            raise ValueError("HSV mode needs an RGB or RGBA image")
        hsv = rgb_to_hsv(I[..., :3])
        guide = None if G is None else _value_plane(G)
        hsv[..., 2] = _iterate(hsv[..., 2], guide, params)
        rgb = hsv_to_rgb(hsv)
        return np.concatenate([rgb, I[..., 3:]], axis=2) if channels == 4 else rgb

    # an alpha channel is carried through untouched
    colour = 3 if channels == 4 else channels
    guides = _split_guide(G if (G is None or G.ndim == 2 or G.shape[2] != 4) else G[..., :3], colour)
    planes = _run_planes([(I[..., c], guides[c], params) for c in range(colour)])
    if channels == 4:
        planes.append(I[..., 3].copy())
    return np.stack(planes, axis=2)


def guided_filter(p, guide, radius: int, epsilon: float) -> np.ndarray:
    """Classic guided filter of plane ``p`` steered by plane ``guide``."""
    stats = patch_stats(p, guide, radius)
    a = stats.phi / (stats.varsigma2 + epsilon)
    b = stats.mu - a * stats.nu
    return box_filter(a, radius) * as_float(guide) + box_filter(b, radius)


def filter_fixed_alpha(I, alpha: float, radius: int) -> np.ndarray:
    """Non-adaptive blend ``alpha * I + (1 - alpha) * local_mean``.

    ``alpha < 1`` low-passes, ``alpha > 1`` is unsharp masking. Accepts 1-D
    signals as well as images.
    """
    I = as_float(I)
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if I.ndim == 3:
        return np.stack(
            [filter_fixed_alpha(I[..., c], alpha, radius) for c in range(I.shape[2])], axis=2
        )
    return alpha * I + (1.0 - alpha) * box_filter(I, radius)


def variance_ratio(I, J, radius: int) -> np.ndarray:
    """Per-patch tau^2 / sigma^2: spread of ``J`` about the input patch mean over the input variance."""
    I = as_float(I)
    J = as_float(J)
    if I.shape != J.shape:
        raise ValueError("input and output differ in shape")
    mu = box_filter(I, radius)
    sigma2 = np.maximum(box_filter(I * I, radius) - mu * mu, 0.0)
    tau2 = np.maximum(box_filter(J * J, radius) - 2.0 * mu * box_filter(J, radius) + mu * mu, 0.0)
    return tau2 / np.maximum(sigma2, VARIANCE_FLOOR)


def predicted_variance_ratio(stats: PatchStats, epsilon: float, kappa) -> np.ndarray:
    """Closed-form tau^2 / sigma^2 of the guided patch model.

    Written so that it stays finite when the patches are uncorrelated;
    reduces to rho^2 (var_G / (var_G + eps))^2 at ``kappa = 0``.
    """
    sigma2 = np.maximum(stats.sigma2, VARIANCE_FLOOR)
    shrink = stats.varsigma2 / (stats.varsigma2 + epsilon)
    rho2 = np.minimum(stats.rho ** 2, 1.0)
    ke = np.asarray(kappa, dtype=np.float64) * epsilon
    first = rho2 * shrink ** 2
    root = np.sqrt(first ** 2 + 4.0 * ke * rho2 * shrink ** 3 / sigma2)
    return 0.5 * (first + root) + ke * shrink / sigma2
