import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import brute_psnr, brute_ssim
from mmvpr.core import ImageBuffer, ValidationError
from mmvpr.image_metrics import img_scores, ssim_plane


def test_identical_images():
    a = ImageBuffer(np.random.default_rng(0).integers(0, 256, (20, 24, 3)))
    s = img_scores(a, a)
    assert (s.l1_pct, s.l2_pct, s.psnr, s.ssim) == (0.0, 0.0, 100.0, 1.0)


@pytest.mark.parametrize("value", [0, 17, 255])
def test_constant_identical_ssim_is_one(value):
    a = ImageBuffer(np.full((10, 10), value))
    assert img_scores(a, a).ssim == 1.0


def test_black_vs_white():
    s = img_scores(ImageBuffer(np.zeros((9, 9))), ImageBuffer(np.full((9, 9), 255)))
    assert s.l1_pct == 100.0 and s.l2_pct == 100.0 and s.psnr == 0.0


@pytest.mark.parametrize("seed", range(10))
def test_random_pairs_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 256, (32, 32))
    b = np.clip(a + rng.integers(-40, 41, (32, 32)), 0, 255)
    s = img_scores(ImageBuffer(a), ImageBuffer(b))
    assert abs(s.psnr - brute_psnr(a, b)) < 1e-6
    assert abs(s.ssim - brute_ssim(a, b)) < 1e-6
    assert abs(s.l1_pct - 100 * np.abs(a - b).mean() / 255) < 1e-9


def test_small_plane_uses_single_window():
    rng = np.random.default_rng(3)
    a, b = rng.integers(0, 256, (2, 5, 6))
    assert abs(ssim_plane(a / 255.0, b / 255.0) - brute_ssim(a, b)) < 1e-9


def test_rgb_averages_channels():
    rng = np.random.default_rng(4)
    a, b = rng.integers(0, 256, (2, 12, 12, 3))
    s = img_scores(ImageBuffer(a), ImageBuffer(b))
    assert abs(s.ssim - np.mean([brute_ssim(a[..., c], b[..., c]) for c in range(3)])) < 1e-9


def test_shape_mismatch():
    with pytest.raises(ValidationError):
        img_scores(ImageBuffer(np.zeros((4, 4))), ImageBuffer(np.zeros((4, 4, 3))))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_symmetry(seed):
    rng = np.random.default_rng(seed)
    a, b = (ImageBuffer(x) for x in rng.integers(0, 256, (2, 11, 13)))
    s, t = img_scores(a, b), img_scores(b, a)
    assert s.l1_pct == t.l1_pct and s.l2_pct == t.l2_pct and s.psnr == t.psnr
    assert abs(s.ssim - t.ssim) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_psnr_decreases_with_noise_amplitude(seed):
    rng = np.random.default_rng(seed)
    base = rng.integers(60, 196, (16, 16))
    pattern = rng.choice([-1, 1], size=base.shape)
    ref = ImageBuffer(base)
    psnrs = [img_scores(ref, ImageBuffer(base + amp * pattern)).psnr for amp in (1, 5, 20, 50)]
    assert all(x > y for x, y in zip(psnrs, psnrs[1:]))
