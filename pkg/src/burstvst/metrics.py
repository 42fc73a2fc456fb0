"""Image-quality scores for a (candidate, reference) pair."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import InvalidArgument
from .plane import ImagePlane

PSNR_CAP_DB = 99.0
DEFAULT_GAMMA = 1.0 / 2.2
SSIM_WIN = 11
SSIM_SIGMA = 1.5
SSIM_K1, SSIM_K2 = 0.01, 0.03
LOSS_W1 = 0.5


@dataclass(frozen=True)
class MetricReport:
    psnr_db: float
    ssim: float
    l1: float
    grad_l1: float
    combined_loss: float

    def as_dict(self):
        return asdict(self)


def _pair(a, b):
    a = np.asarray(a.data if isinstance(a, ImagePlane) else a, dtype=np.float64)
    b = np.asarray(b.data if isinstance(b, ImagePlane) else b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgument(f"shape mismatch {a.shape} vs {b.shape}")
    return a, b


def _tone(x, peak, gamma):
    return (np.clip(x, 0.0, peak) / peak) ** gamma


def psnr(a, b, peak: float = 1.0, gamma: float = DEFAULT_GAMMA) -> float:
    """PSNR in dB after clamping to [0, peak], normalizing and applying ``x ** gamma``."""
    if not peak > 0:
        raise InvalidArgument("peak must be positive")
    a, b = _pair(a, b)
    mse = float(np.mean((_tone(a, peak, gamma) - _tone(b, peak, gamma)) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * math.log10(1.0 / mse))


def _gauss_window():
    r = SSIM_WIN // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / SSIM_SIGMA) ** 2)
    return k / k.sum()


def _valid_filter(x, k):
    r = len(k) // 2
    y = correlate1d(correlate1d(x, k, axis=0, mode="nearest"), k, axis=1, mode="nearest")
    return y[r:-r, r:-r]


def ssim(a, b, peak: float = 1.0, gamma: float = 1.0) -> float:
    """Mean single-scale SSIM over all fully-covered 11x11 Gaussian windows."""
    a, b = _pair(a, b)
    if min(a.shape) < SSIM_WIN:
        raise InvalidArgument(f"SSIM needs at least {SSIM_WIN}x{SSIM_WIN}, got {a.shape}")
    if not peak > 0:
        raise InvalidArgument("peak must be positive")
    if gamma != 1.0:
        a, b = _tone(a, peak, gamma), _tone(b, peak, gamma)
        peak = 1.0
    k = _gauss_window()
    c1, c2 = (SSIM_K1 * peak) ** 2, (SSIM_K2 * peak) ** 2
    mu_a, mu_b = _valid_filter(a, k), _valid_filter(b, k)
    saa = _valid_filter(a * a, k) - mu_a**2
    sbb = _valid_filter(b * b, k) - mu_b**2
    sab = _valid_filter(a * b, k) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * sab + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (saa + sbb + c2)
    return float(np.mean(num / den))


def l1_gradient_loss(candidate, target, w1: float = LOSS_W1) -> tuple[float, float, float]:
    """(l1, grad_l1, l1 + w1 * grad_l1).

    ``grad_l1`` sums the mean absolute error of the horizontal and vertical
    forward differences, each taken over its valid region.
    """
    c, t = _pair(candidate, target)
    l1 = float(np.mean(np.abs(c - t)))
    grad = 0.0
    if c.shape[1] > 1:
        grad += float(np.mean(np.abs(np.diff(c, axis=1) - np.diff(t, axis=1))))
    if c.shape[0] > 1:
        grad += float(np.mean(np.abs(np.diff(c, axis=0) - np.diff(t, axis=0))))
    return l1, grad, l1 + w1 * grad


def report(candidate, reference, peak: float = 1.0, gamma: float = DEFAULT_GAMMA, w1: float = LOSS_W1) -> MetricReport:
    l1, g, comb = l1_gradient_loss(candidate, reference, w1)
    return MetricReport(psnr(candidate, reference, peak, gamma), ssim(candidate, reference, peak, gamma), l1, g, comb)
