"""Burst container and RGGB packing."""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgument
from .noise_model import NoiseParams
from .plane import ImagePlane


class Layout(enum.Enum):
    GRAY = "gray"
    BAYER_RGGB = "bayer_rggb"


@dataclass(frozen=True)
class Burst:
    """A reference frame plus N-1 alternates in temporal order."""

    reference: ImagePlane
    alternates: tuple[ImagePlane, ...] = ()
    params: NoiseParams | None = None
    layout: Layout = Layout.GRAY

    def __post_init__(self):
        alts = tuple(self.alternates)
        object.__setattr__(self, "alternates", alts)
        for a in alts:
            if a.shape != self.reference.shape:
                raise InvalidArgument(f"alternate shape {a.shape} != reference {self.reference.shape}")
            if a.domain is not self.reference.domain:
                raise InvalidArgument("all frames must share one domain tag")
        if self.layout is Layout.BAYER_RGGB and (self.reference.height % 2 or self.reference.width % 2):
            raise InvalidArgument("Bayer frames need even dimensions")

    @property
    def frames(self) -> tuple[ImagePlane, ...]:
        return (self.reference,) + self.alternates

    def __len__(self):
        return 1 + len(self.alternates)

    def map_frames(self, fn) -> "Burst":
        return replace(self, reference=fn(self.reference), alternates=tuple(fn(a) for a in self.alternates))


def pack_rggb(mosaic: np.ndarray) -> np.ndarray:
    """(H, W) RGGB mosaic -> (4, H/2, W/2) planes ordered R, G1, G2, B."""
    return np.stack([mosaic[0::2, 0::2], mosaic[0::2, 1::2], mosaic[1::2, 0::2], mosaic[1::2, 1::2]])


def unpack_rggb(planes: np.ndarray) -> np.ndarray:
    _, h, w = planes.shape
    out = np.empty((2 * h, 2 * w), dtype=planes.dtype)
    out[0::2, 0::2], out[0::2, 1::2], out[1::2, 0::2], out[1::2, 1::2] = planes
    return out


def green_average(planes: np.ndarray) -> np.ndarray:
    return 0.5 * (planes[1].astype(np.float64) + planes[2])
