"""Deterministic synthetic scenes used by the test-suite and the demo commands."""

from __future__ import annotations

import numpy as np

from .imgcore import box_filter


def _smooth_noise(rng, h, w, radius):
    n = rng.standard_normal((h, w))
    for _ in range(3):
        n = box_filter(n, radius)
    n -= n.mean()
    return n / (np.abs(n).max() + 1e-12)


def textured_scene(h: int = 256, w: int = 256, seed: int = 0, channels: int = 3) -> np.ndarray:
    """Piecewise-smooth colour regions with sharp edges and fine texture, in [0, 1]."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w] / max(h, w)
    base = np.empty((h, w, channels))
    for c in range(channels):
        gx, gy = rng.uniform(-0.3, 0.3, 2)
        base[..., c] = 0.45 + gx * (xx - 0.5) + gy * (yy - 0.5)
    for _ in range(6):
        cy, cx = rng.uniform(0.15, 0.85, 2)
        rad = rng.uniform(0.06, 0.18)
        colour = rng.uniform(0.15, 0.85, channels)
        if rng.random() < 0.5:
            m = (yy - cy) ** 2 + (xx - cx) ** 2 < rad ** 2
        else:
            m = (np.abs(yy - cy) < rad) & (np.abs(xx - cx) < rad * 0.7)
        base[m] = colour
    fine = _smooth_noise(rng, h, w, 1)
    mid = _smooth_noise(rng, h, w, 3)
    texture = 0.08 * fine + 0.06 * mid
    return np.clip(base + texture[..., None], 0.0, 1.0)


def flash_noflash_pair(size: int = 256, seed: int = 7) -> tuple[np.ndarray, np.ndarray]:
    """(no-flash, flash): the flash shot is the clean scene, the no-flash shot is dim, colour-cast and noisy."""
    rng = np.random.default_rng(seed + 1)
    flash = textured_scene(size, size, seed)
    cast = np.array([1.0, 0.85, 0.6])
    noflash = 0.45 * flash * cast + 0.04
    noflash = noflash + rng.normal(0.0, 0.03, noflash.shape)
    return np.clip(noflash, 0.0, 1.0), flash


def nn_downsample(img: np.ndarray, factor: int) -> np.ndarray:
    """Keep every ``factor``-th pixel (the sample that upsample_nearest maps back)."""
    return img[::factor, ::factor].copy()
