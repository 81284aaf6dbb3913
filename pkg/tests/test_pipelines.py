from dataclasses import replace

import numpy as np
import pytest

from oracles import reference_guided_filter
from scenes import checkerboard_face, half_blurred, near_far, region_tv, region_variance
from ssfilt.imgcore import box_filter, luma, upsample_nearest
from ssfilt.metrics import ergas
from ssfilt.pipelines import (
    SHARPEN_DEFOCUS,
    PipelineConfig,
    blur_guided,
    face_enhance,
    flash_noflash,
    kappa_from_blur,
    kappa_from_depth,
    pansharpen,
    preset,
    sdof,
)
from ssfilt.ssfilter import UNIFORM, FilterParams
from ssfilt.synthetic import flash_noflash_pair, nn_downsample, textured_scene


def test_pipeline_config_validation():
    f = FilterParams(1, 0.1)
    for kw in (dict(mode="fuzzy"), dict(window=4), dict(refine_radius=-1), dict(refine_epsilon=0), dict(resolution_ratio=0)):
        with pytest.raises(ValueError):
            PipelineConfig(f, **kw)


def test_sdof_far_smoothed_near_sharpened():
    img, depth, far, near = near_far()
    out = sdof(img, depth, preset("fig9"))
    assert region_variance(out, far) < region_variance(img, far)
    assert region_variance(out, near) >= region_variance(img, near)


def test_sdof_kappa_follows_depth():
    cfg = preset("fig9")
    k = kappa_from_depth(np.array([[0.0, 0.5, 1.0]]), cfg)
    assert k[0, 0] > 1.9 and k[0, 2] < 0.01
    assert k[0, 0] > k[0, 1] > k[0, 2]


def test_sdof_rejects_mismatched_depth():
    with pytest.raises(ValueError):
        sdof(np.zeros((8, 8, 3)), np.zeros((8, 9)), preset("fig9"))
    with pytest.raises(ValueError):
        sdof(np.zeros((8, 8, 3)), np.zeros((8, 8, 3)), preset("fig9"))


def test_blur_smooth_mode():
    img, blurred, sharp = half_blurred()
    out = blur_guided(img, preset("fig13-smooth"))
    assert region_tv(out, blurred) <= 0.8 * region_tv(img, blurred)
    assert abs(region_tv(out, sharp) / region_tv(img, sharp) - 1) < 0.02


def test_blur_sharpen_mode():
    img, blurred, sharp = half_blurred()
    cfg = preset("fig13-sharpen")
    out = blur_guided(img, cfg)
    assert region_tv(out, blurred) > region_tv(img, blurred)
    assert abs(region_tv(out, sharp) / region_tv(img, sharp) - 1) < 0.02
    k = kappa_from_blur(img, cfg, SHARPEN_DEFOCUS)
    assert k[blurred == 1].mean() > k[sharp == 1].mean()


def test_face_cells():
    img, mask, skin, other = checkerboard_face()
    out = face_enhance(img, mask, preset("fig7"))
    assert region_tv(out, other) > region_tv(img, other)
    assert region_tv(out, skin) < region_tv(img, skin)


def test_flash_fusion_uniform_kappa0_is_guided_filter(rng):
    noflash, flash = rng.random((24, 24)), rng.random((24, 24))
    cfg = PipelineConfig(FilterParams(3, 0.01, kappa=0.0, scale=UNIFORM))
    np.testing.assert_allclose(flash_noflash(noflash, flash, cfg), reference_guided_filter(noflash, flash, 3, 0.01), atol=1e-9)


def test_flash_fusion_size_mismatch():
    with pytest.raises(ValueError):
        flash_noflash(np.zeros((8, 8)), np.zeros((9, 8)), preset("gf-baseline"))


def test_synthetic_pair_is_deterministic():
    a = flash_noflash_pair(32)
    b = flash_noflash_pair(32)
    np.testing.assert_array_equal(a[0], b[0])
    assert a[0].shape == (32, 32, 3) and a[0].mean() < a[1].mean()


def test_pansharpen_beats_nearest_neighbour():
    truth = textured_scene(128, 128, seed=100)
    ms, pan = nn_downsample(truth, 4), luma(truth)
    fused = pansharpen(ms, pan, preset("fig17"))
    base = upsample_nearest(ms, 128, 128)
    assert fused.shape == truth.shape
    assert ergas(fused, truth, 4).value < ergas(base, truth, 4).value


def test_pansharpen_self_consistency(rng):
    ms = textured_scene(48, 48, seed=9)
    cfg = replace(preset("fig17"), filter=FilterParams(2, 0.01, kappa=0.0, scale=UNIFORM), histogram_match=False)
    out = pansharpen(ms, luma(ms), cfg)
    ref = np.dstack([reference_guided_filter(ms[..., c], luma(ms), 2, 0.01) for c in range(3)])
    np.testing.assert_allclose(out, ref, atol=1e-9)
    # edge-aware: closer to the input than a plain box blur of the same radius
    boxed = np.dstack([box_filter(ms[..., c], 2) for c in range(3)])
    assert ergas(out, ms, 1).value < ergas(boxed, ms, 1).value


def test_pansharpen_single_band_and_size_check():
    ms = textured_scene(16, 16, seed=1, channels=1)[..., 0]
    out = pansharpen(ms, np.repeat(np.repeat(ms, 2, 0), 2, 1), preset("fig17"))
    assert out.shape == (32, 32)
    with pytest.raises(ValueError):
        pansharpen(np.zeros((16, 16, 3)), np.zeros((8, 8)), preset("fig17"))
