"""Variance-stabilizing transforms for Poisson-Gaussian raw data.

The pipeline path is ``gain_normalize`` followed by a root-type transform.
After gain normalization a pixel is ``Poisson(x*) + N(g, s2)`` where
``s2 = sigma_r**2 / sigma_s**2``; the generalized Freeman-Tukey map

    y = sqrt(x + s2 - g) + sqrt(x + 1 + s2 - g)

brings it to roughly unit variance.  Radicands that read noise pushes below
zero are clamped, which keeps every forward map total and monotone.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .noise_model import NoiseParams
from .plane import Domain, ImagePlane, expect_domain


class VstKind(enum.Enum):
    FREEMAN_TUKEY = "freeman_tukey"
    GAT = "gat"
    KSIGMA = "ksigma"
    IDENTITY = "identity"


@dataclass(frozen=True)
class VstParams:
    sigma_s: float
    acute_sigma_sq: float
    gauss_mean: float = 0.0

    def __post_init__(self):
        if not self.acute_sigma_sq >= 0:
            raise InvalidArgument(f"acute_sigma_sq must be >= 0, got {self.acute_sigma_sq}")

    @classmethod
    def from_noise(cls, p: NoiseParams, gauss_mean: float = 0.0) -> "VstParams":
        return cls(p.sigma_s, p.acute_sigma_sq, gauss_mean)


def _check_sigma_s(sigma_s: float) -> None:
    if not sigma_s > 0:
        raise InvalidArgument(f"sigma_s must be positive, got {sigma_s}")


def gain_normalize(x: ImagePlane, p: NoiseParams) -> ImagePlane:
    expect_domain(x, Domain.RAW_LINEAR)
    _check_sigma_s(p.sigma_s)
    return ImagePlane(x.data.astype(np.float64) / p.sigma_s, Domain.GAIN_NORMALIZED)


def gain_denormalize(xa: ImagePlane, p: NoiseParams) -> ImagePlane:
    expect_domain(xa, Domain.GAIN_NORMALIZED)
    _check_sigma_s(p.sigma_s)
    return ImagePlane(xa.data.astype(np.float64) * p.sigma_s, Domain.RAW_LINEAR)


# --- array-level maps (float64 in, float64 out) ----------------------------

def _ft(z, s2, g):
    return np.sqrt(np.maximum(z + s2 - g, 0.0)) + np.sqrt(np.maximum(z + 1.0 + s2 - g, 0.0))


def _ft_inv(y, s2, g):
    y2 = y * y
    return (y2 * y2 - 2.0 * y2 + 1.0) / (4.0 * y2) - s2 + g


def _gat(z, s2, g):
    return 2.0 * np.sqrt(np.maximum(z + 0.375 + s2 - g, 0.0))


def _gat_inv(y, s2, g):
    return y * y / 4.0 - 0.375 - s2 + g


# --- plane-level operations ------------------------------------------------

def ft_forward(xa: ImagePlane, vp: VstParams) -> ImagePlane:
    expect_domain(xa, Domain.GAIN_NORMALIZED)
    y = _ft(xa.data.astype(np.float64), vp.acute_sigma_sq, vp.gauss_mean)
    return ImagePlane(y, Domain.VST)


def ft_inverse(y: ImagePlane, vp: VstParams, p: NoiseParams) -> ImagePlane:
    """Algebraic inverse back to raw-linear units.

    Exact on the unclamped branch.  Non-positive samples are rejected: a
    denoised stabilized plane sits at or above ``ft_forward(0) >= 1``, so they
    indicate a bug upstream.
    """
    expect_domain(y, Domain.VST)
    _check_sigma_s(p.sigma_s)
    v = y.data.astype(np.float64)
    if np.any(v <= 0):
        raise InvalidArgument(f"inverse needs y > 0; min sample is {v.min():g}")
    return ImagePlane(_ft_inv(v, vp.acute_sigma_sq, vp.gauss_mean) * p.sigma_s, Domain.RAW_LINEAR)


def gat_forward(xa: ImagePlane, vp: VstParams) -> ImagePlane:
    expect_domain(xa, Domain.GAIN_NORMALIZED)
    return ImagePlane(_gat(xa.data.astype(np.float64), vp.acute_sigma_sq, vp.gauss_mean), Domain.VST)


def gat_inverse(y: ImagePlane, vp: VstParams, p: NoiseParams) -> ImagePlane:
    expect_domain(y, Domain.VST)
    _check_sigma_s(p.sigma_s)
    v = y.data.astype(np.float64)
    return ImagePlane(_gat_inv(v, vp.acute_sigma_sq, vp.gauss_mean) * p.sigma_s, Domain.RAW_LINEAR)


def k_sigma_forward(x: ImagePlane, p: NoiseParams) -> ImagePlane:
    """Affine ISO-invariant map ``x / sigma_s + sigma_r^2 / sigma_s^2``.

    Removes gain dependence only; the output variance still grows with brightness.
    """
    expect_domain(x, Domain.RAW_LINEAR)
    _check_sigma_s(p.sigma_s)
    return ImagePlane(x.data.astype(np.float64) / p.sigma_s + p.acute_sigma_sq, Domain.VST)


def k_sigma_inverse(y: ImagePlane, p: NoiseParams) -> ImagePlane:
    expect_domain(y, Domain.VST)
    _check_sigma_s(p.sigma_s)
    return ImagePlane((y.data.astype(np.float64) - p.acute_sigma_sq) * p.sigma_s, Domain.RAW_LINEAR)


def forward(kind: VstKind, x: ImagePlane, p: NoiseParams, gauss_mean: float = 0.0) -> ImagePlane:
    """Raw-linear plane into the denoising domain for the selected transform."""
    kind = VstKind(kind)
    if kind is VstKind.KSIGMA:
        return k_sigma_forward(x, p)
    if kind is VstKind.IDENTITY:
        expect_domain(x, Domain.RAW_LINEAR)
        return ImagePlane(x.data, Domain.VST)
    vp = VstParams.from_noise(p, gauss_mean)
    xa = gain_normalize(x, p)
    return ft_forward(xa, vp) if kind is VstKind.FREEMAN_TUKEY else gat_forward(xa, vp)


def inverse(kind: VstKind, y: ImagePlane, p: NoiseParams, gauss_mean: float = 0.0) -> ImagePlane:
    kind = VstKind(kind)
    if kind is VstKind.KSIGMA:
        return k_sigma_inverse(y, p)
    if kind is VstKind.IDENTITY:
        expect_domain(y, Domain.VST)
        return ImagePlane(y.data, Domain.RAW_LINEAR)
    vp = VstParams.from_noise(p, gauss_mean)
    if kind is VstKind.FREEMAN_TUKEY:
        return ft_inverse(y, vp, p)
    return gat_inverse(y, vp, p)


# --- Monte-Carlo flatness profile ------------------------------------------

# Extra root transforms that only exist for comparison plots.
_PROFILE_MAPS = {
    VstKind.FREEMAN_TUKEY: _ft,
    VstKind.GAT: _gat,
    VstKind.KSIGMA: lambda z, s2, g: z + s2,
    VstKind.IDENTITY: lambda z, s2, g: z,
    "bartlett": lambda z, s2, g: 2.0 * np.sqrt(np.maximum(z + 0.5 + s2 - g, 0.0)),
    "root": lambda z, s2, g: 2.0 * np.sqrt(np.maximum(z + s2 - g, 0.0)),
}

PROFILE_KINDS = tuple(k.value if isinstance(k, VstKind) else k for k in _PROFILE_MAPS)


def _profile_map(kind):
    if isinstance(kind, VstKind):
        return _PROFILE_MAPS[kind]
    if kind in _PROFILE_MAPS:
        return _PROFILE_MAPS[kind]
    try:
        return _PROFILE_MAPS[VstKind(kind)]
    except ValueError:
        raise InvalidArgument(f"unknown transform {kind!r}; known: {PROFILE_KINDS}") from None


def stabilization_profile(kind, vp: VstParams, means, n_samples: int = 1_000_000, seed: int = 0):
    """Empirical variance of the transformed ``Poisson(m) + N(g, s2)`` for each mean ``m``.

    Returns a list of ``(mean, unbiased_sample_variance)`` pairs.  The random
    stream for a mean is keyed on ``(seed, mean)``, so results do not depend on
    the order or length of ``means``.
    """
    means = [float(m) for m in means]
    if not means:
        raise InvalidArgument("means must be non-empty")
    if any(m < 0 for m in means):
        raise InvalidArgument("means must be non-negative")
    if n_samples < 10_000:
        raise InvalidArgument(f"n_samples must be >= 1e4, got {n_samples}")
    fn = _profile_map(kind)
    s2, g = vp.acute_sigma_sq, vp.gauss_mean
    sd = float(np.sqrt(s2))
    out = []
    for m in means:
        stream = int(np.float64(m).view(np.uint64))
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed) & 0xFFFF_FFFF_FFFF_FFFF, stream])))
        z = rng.poisson(m, size=n_samples).astype(np.float64)
        if sd > 0 or g != 0:
            z += rng.normal(g, sd, size=n_samples)
        out.append((m, float(np.var(fn(z, s2, g), ddof=1))))
    return out
