"""Image quality metrics for the denoising evaluation: PSNR and SSIM."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class ImagePair:
    reference: np.ndarray
    test: np.ndarray
    peak: int = 255

    def __post_init__(self) -> None:
        if self.reference.shape != self.test.shape:
            raise ValueError("image dimensions differ")
        if self.reference.ndim != 2:
            raise ValueError("expected 2-D grayscale images")


def psnr(pair: ImagePair) -> float:
    """Peak signal-to-noise ratio in dB; math.inf for identical images."""
    ref = pair.reference.astype(np.float64)
    test = pair.test.astype(np.float64)
    mse = float(np.mean((ref - test) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(pair.peak**2 / mse)


def _gaussian_kernel() -> np.ndarray:
    offsets = np.arange(SSIM_WINDOW) - SSIM_WINDOW // 2
    k = np.exp(-(offsets**2) / (2.0 * SSIM_SIGMA**2))
    return k / k.sum()


def _windowed_mean(img: np.ndarray) -> np.ndarray:
    """Gaussian-weighted local mean over fully interior (valid) windows."""
    k = _gaussian_kernel()
    half = SSIM_WINDOW // 2
    out = correlate1d(correlate1d(img, k, axis=0), k, axis=1)
    return out[half:-half, half:-half]


def ssim(pair: ImagePair) -> float:
    """Mean structural similarity with an 11x11 Gaussian window (sigma 1.5).

    Windows are restricted to fully interior positions, so both dimensions
    must be at least the window size.
    """
    if min(pair.reference.shape) < SSIM_WINDOW:
        raise ValueError(
            f"images must be at least {SSIM_WINDOW} pixels in each dimension"
        )
    x = pair.reference.astype(np.float64)
    y = pair.test.astype(np.float64)
    c1 = (SSIM_K1 * pair.peak) ** 2
    c2 = (SSIM_K2 * pair.peak) ** 2
    mu_x = _windowed_mean(x)
    mu_y = _windowed_mean(y)
    var_x = _windowed_mean(x * x) - mu_x**2
    var_y = _windowed_mean(y * y) - mu_y**2
    cov = _windowed_mean(x * y) - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    den = (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))
