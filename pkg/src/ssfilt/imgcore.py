"""Raster primitives shared by the filter, the kappa maps and the pipelines.

Images are plain ``numpy`` arrays: ``(H, W)`` for a single plane or
``(H, W, C)`` for multi-channel data, float64, nominal range [0, 1].
Every windowed operation uses half-sample symmetric padding (the edge
sample is duplicated), the same convention as MATLAB's ``'symmetric'``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


def as_float(img) -> np.ndarray:
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim not in (1, 2, 3) or arr.size == 0:
        raise ValueError(f"expected a non-empty 1-D, 2-D or 3-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains NaN or Inf samples")
    return arr


def _spatial_min(shape: tuple[int, ...]) -> int:
    return min(shape[:2]) if len(shape) >= 2 else shape[0]


def pad_symmetric(src, margin: int) -> np.ndarray:
    """Pad a 1-D or 2-D field by ``margin`` samples on every side.

    Index -1 maps to 0, -2 to 1, ``n`` to ``n - 1`` and so on.
    """
    arr = np.asarray(src, dtype=np.float64)
    margin = int(margin)
    if margin < 0:
        raise ValueError("margin must be non-negative")
    if arr.ndim not in (1, 2):
        raise ValueError("pad_symmetric expects a 1-D or 2-D field")
    if margin == 0:
        return arr.copy()
    if margin >= _spatial_min(arr.shape):
        raise ValueError(
            f"margin {margin} must be smaller than the field size {arr.shape}"
        )
    return np.pad(arr, margin, mode="symmetric")


def _window_sum(x: np.ndarray, radius: int, axis: int) -> np.ndarray:
    # running sum over an axis already padded by ``radius`` on both ends
    k = 2 * radius + 1
    c = np.cumsum(x, axis=axis)
    zero_shape = list(x.shape)
    zero_shape[axis] = 1
    c = np.concatenate([np.zeros(zero_shape, dtype=c.dtype), c], axis=axis)
    hi = np.take(c, np.arange(k, c.shape[axis]), axis=axis)
    lo = np.take(c, np.arange(0, c.shape[axis] - k), axis=axis)
    return hi - lo


def _check_radius(shape: tuple[int, ...], radius: int) -> None:
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if 2 * radius + 1 > 2 * _spatial_min(shape):
        raise ValueError(
            f"radius {radius} too large for a field of shape {shape}: "
            "the window must fit inside the symmetric padding"
        )


def box_sum(src, radius: int) -> np.ndarray:
    """Unnormalised window sum; integer inputs stay exact."""
    arr = np.asarray(src)
    radius = int(radius)
    _check_radius(arr.shape, radius)
    if radius == 0:
        return arr.copy()
    out = np.pad(arr, radius, mode="symmetric")
    for axis in reversed(range(arr.ndim)):
        out = _window_sum(out, radius, axis)
    return out


def box_filter(src, radius: int) -> np.ndarray:
    """Mean over the ``(2r+1)``-wide window centred on every sample.

    Works on 1-D signals and 2-D fields. Two separable running-sum passes
    (rows, then columns) make the cost per sample independent of ``radius``.
    """
    arr = as_float(src)
    if arr.ndim == 3:
        raise ValueError("box_filter works on single planes; filter channels separately")
    radius = int(radius)
    _check_radius(arr.shape, radius)
    if radius == 0:
        return arr.copy()
    return box_sum(arr, radius) / float((2 * radius + 1) ** arr.ndim)


@dataclass(frozen=True)
class PatchStats:
    """Per-patch first and second moments of an input/guide pair."""

    mu: np.ndarray
    nu: np.ndarray
    sigma2: np.ndarray
    varsigma2: np.ndarray
    phi: np.ndarray
    radius: int

    @property
    def rho(self) -> np.ndarray:
        """Correlation coefficient of the two patches (0 where undefined)."""
        denom = np.sqrt(self.sigma2 * self.varsigma2)
        with np.errstate(invalid="ignore", divide="ignore"):
            r = np.where(denom > 0, self.phi / np.where(denom > 0, denom, 1.0), 0.0)
        return r


def patch_stats(I, G, radius: int) -> PatchStats:
    I = as_float(I)
    G = as_float(G)
    if I.shape != G.shape:
        raise ValueError(f"input {I.shape} and guide {G.shape} differ in shape")
    if I.ndim != 2:
        raise ValueError("patch_stats expects single-plane fields")
    mu = box_filter(I, radius)
    sigma2 = np.maximum(box_filter(I * I, radius) - mu * mu, 0.0)
    if G is I or np.array_equal(I, G):
        return PatchStats(mu, mu, sigma2, sigma2, sigma2, int(radius))
    nu = box_filter(G, radius)
    varsigma2 = np.maximum(box_filter(G * G, radius) - nu * nu, 0.0)
    phi = box_filter(I * G, radius) - mu * nu
    return PatchStats(mu, nu, sigma2, varsigma2, phi, int(radius))


def luma(img) -> np.ndarray:
    arr = as_float(img)
    if arr.ndim == 2:
        return arr
    if arr.shape[2] == 1:
        return arr[..., 0]
    if arr.shape[2] < 3:
        raise ValueError("luma needs at least three channels")
    wr, wg, wb = LUMA_WEIGHTS
    return wr * arr[..., 0] + wg * arr[..., 1] + wb * arr[..., 2]


def _require_rgb(arr: np.ndarray) -> None:
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected a 3-channel image, got shape {arr.shape}")


def rgb_to_hsv(img) -> np.ndarray:
    """Hexcone HSV with hue expressed as a fraction of a turn in [0, 1)."""
    rgb = as_float(img)
    _require_rgb(rgb)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=2)
    c = v - rgb.min(axis=2)
    safe_c = np.where(c > 0, c, 1.0)
    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)

    h = np.zeros_like(v)
    is_r = (v == r) & (c > 0)
    is_g = (v == g) & (c > 0) & ~is_r
    is_b = (c > 0) & ~is_r & ~is_g
    h = np.where(is_r, ((g - b) / safe_c) % 6.0, h)
    h = np.where(is_g, (b - r) / safe_c + 2.0, h)
    h = np.where(is_b, (r - g) / safe_c + 4.0, h)
    h = (h / 6.0) % 1.0
    return np.stack([h, s, v], axis=2)


def hsv_to_rgb(img) -> np.ndarray:
    hsv = as_float(img)
    _require_rgb(hsv)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    h6 = (h % 1.0) * 6.0
    sector = np.floor(h6).astype(int) % 6
    f = h6 - np.floor(h6)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    table = [
        (v, t, p),
        (q, v, p),
        (p, v, t),
        (p, q, v),
        (t, p, v),
        (v, p, q),
    ]
    out = np.zeros(hsv.shape, dtype=np.float64)
    for idx, (rr, gg, bb) in enumerate(table):
        m = sector == idx
        out[..., 0][m] = rr[m]
        out[..., 1][m] = gg[m]
        out[..., 2][m] = bb[m]
    return out


def upsample_nearest(img, new_w: int, new_h: int) -> np.ndarray:
    """Nearest-neighbour enlargement: output (y, x) copies source (floor(y*h/H), floor(x*w/W))."""
    arr = as_float(img)
    h, w = arr.shape[:2]
    if new_w < w or new_h < h:
        raise ValueError(f"upsample_nearest cannot shrink {w}x{h} to {new_w}x{new_h}")
    rows = (np.arange(new_h) * h) // new_h
    cols = (np.arange(new_w) * w) // new_w
    return arr[rows][:, cols].copy()


N_BINS = 256


def _bin_index(x: np.ndarray) -> np.ndarray:
    return np.minimum((np.clip(x, 0.0, 1.0) * N_BINS).astype(np.int64), N_BINS - 1)


def _match_plane(src: np.ndarray, ref: np.ndarray) -> np.ndarray:
    src_bins = _bin_index(src)
    src_cdf = np.cumsum(np.bincount(src_bins.ravel(), minlength=N_BINS)) / src_bins.size
    ref_cdf = np.cumsum(np.bincount(_bin_index(ref).ravel(), minlength=N_BINS)) / ref.size
    target = np.searchsorted(ref_cdf, src_cdf, side="left")
    target = np.minimum(target, N_BINS - 1)
    centres = (np.arange(N_BINS) + 0.5) / N_BINS
    return centres[target][src_bins]


def histogram_match(src, reference) -> np.ndarray:
    """Per-channel 256-bin CDF matching; outputs sit on bin midpoints."""
    s = as_float(src)
    r = as_float(reference)
    s_ch = 1 if s.ndim == 2 else s.shape[2]
    r_ch = 1 if r.ndim == 2 else r.shape[2]
    if s_ch != r_ch:
        raise ValueError(f"channel mismatch: {s_ch} vs {r_ch}")
    if s.ndim == 2:
        return _match_plane(s, r)
    return np.stack([_match_plane(s[..., c], r[..., c]) for c in range(s_ch)], axis=2)


def quantize8(x: np.ndarray) -> np.ndarray:
    return np.floor(np.clip(x, 0.0, 1.0) * 255.0 + 0.5).astype(np.int64)


def local_entropy(img, window: int = 33) -> np.ndarray:
    """Shannon entropy (bits) of the 8-bit histogram in every ``window``-wide square."""
    arr = as_float(img)
    if arr.ndim != 2:
        raise ValueError("local_entropy expects a single plane")
    window = int(window)
    if window < 1 or window % 2 == 0:
        raise ValueError(f"window must be odd and positive, got {window}")
    radius = window // 2
    levels = quantize8(arr)
    n = float(window * window)
    out = np.zeros(arr.shape, dtype=np.float64)
    if radius == 0:
        return out
    for level in np.unique(levels):
        count = box_sum((levels == level).astype(np.int64), radius)
        p = count / n
        nz = count > 0
        out[nz] -= p[nz] * np.log2(p[nz])
    # -0.0 and round-off below zero on single-level windows
    return np.maximum(out, 0.0)
