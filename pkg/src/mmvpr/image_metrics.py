"""Reconstruction quality of an image against a reference: L1%, L2%, PSNR, SSIM."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ImageBuffer, ValidationError

PSNR_CAP_DB = 100.0
MSE_FLOOR = 1e-10
SSIM_WINDOW = 8
SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2


@dataclass(frozen=True)
class ImgScores:
    l1_pct: float
    l2_pct: float
    psnr: float
    ssim: float


def _window_means(x: np.ndarray, win: int) -> np.ndarray:
    """Mean over every win x win window (stride 1, valid positions only)."""
    s = np.zeros((x.shape[0] + 1, x.shape[1] + 1), dtype=np.float64)
    s[1:, 1:] = x.cumsum(axis=0).cumsum(axis=1)
    box = s[win:, win:] - s[:-win, win:] - s[win:, :-win] + s[:-win, :-win]
    return box / (win * win)


def ssim_plane(a: np.ndarray, b: np.ndarray, window: int = SSIM_WINDOW) -> float:
    """Mean SSIM of two unit-scale planes over uniform sliding windows.

    Variances and covariance use the population (1/N) normalisation. Planes
    smaller than the window fall back to a single window covering the plane.
    """
    win = min(window, a.shape[0], a.shape[1])
    # Center on the global mean first: it leaves every windowed variance
    # unchanged and keeps the integral-image sums well conditioned.
    shift = 0.5 * (a.mean() + b.mean())
    a = a - shift
    b = b - shift
    mu_a = _window_means(a, win)
    mu_b = _window_means(b, win)
    # No clipping of tiny negative variances: with a == b the three moments
    # must stay bit-identical so the ratio is exactly 1.
    var_a = _window_means(a * a, win) - mu_a * mu_a
    var_b = _window_means(b * b, win) - mu_b * mu_b
    cov = _window_means(a * b, win) - mu_a * mu_b
    mu_a = mu_a + shift
    mu_b = mu_b + shift
    num = (2 * mu_a * mu_b + SSIM_C1) * (2 * cov + SSIM_C2)
    den = (mu_a ** 2 + mu_b ** 2 + SSIM_C1) * (var_a + var_b + SSIM_C2)
    return float(np.mean(num / den))


def img_scores(a: ImageBuffer, b: ImageBuffer) -> ImgScores:
    if a.samples.shape != b.samples.shape:
        raise ValidationError("b", f"shape {b.samples.shape} does not match {a.samples.shape}")
    x = a.samples.astype(np.float64) / 255.0
    y = b.samples.astype(np.float64) / 255.0
    diff = x - y
    l1 = float(np.mean(np.abs(diff)))
    mse = float(np.mean(diff * diff))
    psnr = PSNR_CAP_DB if mse < MSE_FLOOR else min(PSNR_CAP_DB, 10.0 * np.log10(1.0 / mse))
    ssim = float(np.mean([ssim_plane(x[:, :, c], y[:, :, c]) for c in range(x.shape[2])]))
    return ImgScores(100.0 * l1, 100.0 * mse, float(psnr), ssim)
