"""Poisson-Gaussian CMOS raw noise: parameters from gain, seeded synthesis, variance maps.

    x ~ sigma_s * Poisson(x* / sigma_s) + N(0, sigma_r^2)
    Var[x] = sigma_s * x* + sigma_r^2
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .plane import Domain, ImagePlane, expect_domain

# below this sigma_s the shot-noise term is treated as vanished
DEGENERATE_SIGMA_S = 1e-12


@dataclass(frozen=True)
class SensorCalib:
    """Per-sensor constants; the analog gain is supplied separately."""

    q_e: float
    sigma0: float
    sigma_adc: float = 0.0

    def __post_init__(self):
        if not self.q_e > 0:
            raise InvalidArgument(f"q_e must be positive, got {self.q_e}")
        if self.sigma0 < 0 or self.sigma_adc < 0:
            raise InvalidArgument("noise std devs must be non-negative")


@dataclass(frozen=True)
class NoiseParams:
    sigma_s: float
    sigma_r: float

    def __post_init__(self):
        # sigma_s == 0 is representable; operations that divide by it reject it
        if not self.sigma_s >= 0:
            raise InvalidArgument(f"sigma_s must be non-negative, got {self.sigma_s}")
        if not self.sigma_r >= 0:
            raise InvalidArgument(f"sigma_r must be non-negative, got {self.sigma_r}")

    @property
    def acute_sigma_sq(self) -> float:
        """Read-noise variance after dividing the signal by sigma_s."""
        if self.sigma_s <= 0:
            raise InvalidArgument("acute sigma undefined for sigma_s <= 0")
        return (self.sigma_r / self.sigma_s) ** 2


def params_from_gain(calib: SensorCalib, gain: float) -> NoiseParams:
    if not gain > 0:
        raise InvalidArgument(f"gain must be positive, got {gain}")
    sigma_s = calib.q_e * gain
    sigma_r = math.sqrt(gain**2 * calib.sigma0**2 + calib.sigma_adc**2)
    return NoiseParams(sigma_s, sigma_r)


# Published calibration tables, keyed by analog gain.  CRVD gains map to
# ISO 1600 * gain.
PRESETS: dict[str, dict[float, NoiseParams]] = {
    "kpn": {
        1: NoiseParams(2.7e-3, 6.8e-3),
        2: NoiseParams(6.2e-3, 1.5e-2),
        4: NoiseParams(1.4e-2, 3.6e-2),
        8: NoiseParams(3.3e-2, 8.3e-2),
    },
    "crvd": {
        1: NoiseParams(8.6e-4, 8.4e-4),
        2: NoiseParams(1.7e-3, 1.5e-3),
        4: NoiseParams(3.3e-3, 2.8e-3),
        8: NoiseParams(6.5e-3, 5.4e-3),
        16: NoiseParams(1.3e-2, 1.0e-2),
    },
}

CRVD_BASE_ISO = 1600


def crvd_gain_from_iso(iso: float) -> float:
    return iso / CRVD_BASE_ISO


def preset_params(name: str, gain: float) -> NoiseParams:
    """Table entry for ``gain``; log-log interpolation between entries.

    Gains outside the table range are rejected rather than extrapolated.
    """
    try:
        table = PRESETS[name]
    except KeyError:
        raise InvalidArgument(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None
    if not gain > 0:
        raise InvalidArgument(f"gain must be positive, got {gain}")
    if gain in table:
        return table[gain]
    gains = sorted(table)
    if not gains[0] <= gain <= gains[-1]:
        raise InvalidArgument(f"gain {gain} outside preset {name!r} range [{gains[0]}, {gains[-1]}]")
    lg = np.log(gains)
    s = np.exp(np.interp(math.log(gain), lg, np.log([table[g].sigma_s for g in gains])))
    r = np.exp(np.interp(math.log(gain), lg, np.log([table[g].sigma_r for g in gains])))
    return NoiseParams(float(s), float(r))


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & 0xFFFF_FFFF_FFFF_FFFF))


def synth_noise(clean: ImagePlane, params: NoiseParams, seed: int) -> ImagePlane:
    expect_domain(clean, Domain.RAW_LINEAR)
    x = clean.data.astype(np.float64)
    if np.any(x < 0) or not np.all(np.isfinite(x)):
        raise InvalidArgument("clean samples must be finite and non-negative")
    rng = make_rng(seed)
    if params.sigma_s <= DEGENERATE_SIGMA_S:
        shot = x
    else:
        shot = params.sigma_s * rng.poisson(x / params.sigma_s)
    read = rng.normal(0.0, params.sigma_r, size=x.shape) if params.sigma_r > 0 else 0.0
    return ImagePlane(shot + read, Domain.RAW_LINEAR)


def variance_map(noisy: ImagePlane, params: NoiseParams) -> ImagePlane:
    """Per-pixel variance estimate using the noisy sample in place of the clean one."""
    expect_domain(noisy, Domain.RAW_LINEAR)
    x = noisy.data.astype(np.float64)
    v = params.sigma_s * np.maximum(x, 0.0) + params.sigma_r**2
    return ImagePlane(v, Domain.RAW_LINEAR)
