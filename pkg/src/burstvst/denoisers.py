"""Classical per-scale residual predictors for :mod:`burstvst.fuse`.

All of them average their (aligned) inputs first and return
``filtered - inputs[0]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Sequence

import numpy as np
from scipy.ndimage import correlate1d, uniform_filter

from .errors import InvalidArgument
from .fuse import N_SCALES
from .plane import Domain, ImagePlane, expect_domain

WIENER_EPS = 1e-6
MIN_SIGMA_PX = 0.3


def _mean(inputs: Sequence[ImagePlane]) -> np.ndarray:
    if not inputs:
        raise InvalidArgument("denoiser needs at least one input")
    acc = np.zeros(inputs[0].shape)
    for p in inputs:
        acc += p.data
    return acc / len(inputs)


def identity_denoiser(inputs, lower=None) -> ImagePlane:
    first = inputs[0]
    return first.with_data(np.zeros(first.shape))


def gaussian_kernel(sigma_px: float) -> np.ndarray:
    sigma = max(float(sigma_px), MIN_SIGMA_PX)
    r = int(math.ceil(3.0 * sigma))
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


@dataclass(frozen=True)
class Gaussian:
    sigma_px: float = 1.0

    def __post_init__(self):
        if not self.sigma_px > 0:
            raise InvalidArgument("sigma_px must be positive")

    def __call__(self, inputs, lower=None) -> ImagePlane:
        avg = _mean(inputs)
        k = gaussian_kernel(self.sigma_px)
        blur = correlate1d(correlate1d(avg, k, axis=0, mode="nearest"), k, axis=1, mode="nearest")
        return inputs[0].with_data(blur - inputs[0].data)


@dataclass(frozen=True)
class WienerVst:
    """Local linear-MMSE shrinkage towards the windowed mean.

    ``noise_var`` is the per-frame noise variance at this scale (1 in the
    stabilized domain at full resolution).  With ``temporal=True`` it is
    divided by the number of averaged inputs.  A coarser result, when given,
    is blended into the local mean with ``band_weight``.
    """

    window_px: int = 7
    noise_var: float = 1.0
    band_weight: float = 0.0
    temporal: bool = True

    def __post_init__(self):
        if self.window_px < 3 or self.window_px % 2 == 0:
            raise InvalidArgument(f"window must be odd and >= 3, got {self.window_px}")
        if not self.noise_var > 0:
            raise InvalidArgument("noise_var must be positive")
        if not 0.0 <= self.band_weight <= 1.0:
            raise InvalidArgument("band_weight must lie in [0, 1]")

    def __call__(self, inputs, lower=None) -> ImagePlane:
        for p in inputs:
            expect_domain(p, Domain.VST)
        x = _mean(inputs)
        mu = uniform_filter(x, self.window_px, mode="reflect")
        v = np.maximum(uniform_filter(x * x, self.window_px, mode="reflect") - mu * mu, 0.0)
        if lower is not None and self.band_weight > 0:
            mu = (1.0 - self.band_weight) * mu + self.band_weight * np.asarray(lower.data, dtype=np.float64)
        nv = self.noise_var / len(inputs) if self.temporal else self.noise_var
        gain = np.maximum(v - nv, 0.0) / np.maximum(v, WIENER_EPS)
        return inputs[0].with_data(mu + gain * (x - mu) - inputs[0].data)


@dataclass(frozen=True)
class GuidedBlend:
    """Blend the frame average towards the upsampled coarser result."""

    band_weight: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.band_weight <= 1.0:
            raise InvalidArgument("band_weight must lie in [0, 1]")

    def __call__(self, inputs, lower=None) -> ImagePlane:
        avg = _mean(inputs)
        if lower is not None:
            avg = (1.0 - self.band_weight) * avg + self.band_weight * np.asarray(lower.data, dtype=np.float64)
        return inputs[0].with_data(avg - inputs[0].data)


KINDS = ("identity", "gaussian", "wiener_vst", "guided_blend")


@dataclass(frozen=True)
class DenoiserConfig:
    """Config-file form of one stage's bundle.

    ``per_scale`` holds up to three dicts (scale 0 = finest) overriding keys
    for that scale.  Without an override, ``noise_var`` at scale ``i`` is
    ``noise_var / 4**i``, the variance left after ``i`` 2x2 averagings.
    """

    kind: str = "wiener_vst"
    sigma_px: float = 1.0
    window_px: int = 7
    noise_var: float = 1.0
    band_weight: float = 0.0
    per_scale: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown denoiser kind {self.kind!r}; known: {KINDS}")
        ps = tuple(dict(d or {}) for d in self.per_scale)
        if len(ps) > N_SCALES:
            raise InvalidArgument(f"per_scale has {len(ps)} entries, at most {N_SCALES} allowed")
        known = {f.name for f in fields(self)} - {"per_scale"}
        for d in ps:
            bad = set(d) - known
            if bad:
                raise InvalidArgument(f"unknown per-scale keys {sorted(bad)}")
        object.__setattr__(self, "per_scale", ps)

    @classmethod
    def from_dict(cls, d: dict) -> "DenoiserConfig":
        known = {f.name for f in fields(cls)}
        bad = set(d) - known
        if bad:
            raise InvalidArgument(f"unknown denoiser keys {sorted(bad)}")
        d = dict(d)
        if "per_scale" in d:
            d["per_scale"] = tuple(d["per_scale"])
        return cls(**d)

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["per_scale"] = [dict(d) for d in self.per_scale]
        return out

    def for_scale(self, i: int) -> "DenoiserConfig":
        over = dict(self.per_scale[i]) if i < len(self.per_scale) else {}
        if "noise_var" not in over:
            over["noise_var"] = self.noise_var / 4**i
        return replace(self, per_scale=(), **over)

    def build(self):
        if self.kind == "identity":
            return identity_denoiser
        if self.kind == "gaussian":
            return Gaussian(self.sigma_px)
        if self.kind == "guided_blend":
            return GuidedBlend(self.band_weight)
        return WienerVst(self.window_px, self.noise_var, self.band_weight)


def make_bundle(cfg: DenoiserConfig) -> tuple:
    """Three scale denoisers, finest first."""
    return tuple(cfg.for_scale(i).build() for i in range(N_SCALES))


IDENTITY_BUNDLE = (identity_denoiser,) * N_SCALES
