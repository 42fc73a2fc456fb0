"""Single-channel image raster with an explicit value-domain tag."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument


class Domain(enum.Enum):
    RAW_LINEAR = "raw-linear"
    GAIN_NORMALIZED = "gain-normalized"
    VST = "vst"


@dataclass(frozen=True, eq=False)
class ImagePlane:
    """Row-major float32 samples plus the domain they live in."""

    data: np.ndarray
    domain: Domain = Domain.RAW_LINEAR

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidArgument(f"image plane must be a non-empty 2-D array, got shape {arr.shape}")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def with_data(self, data, domain: Domain | None = None) -> "ImagePlane":
        return ImagePlane(data, self.domain if domain is None else domain)


def expect_domain(plane: ImagePlane, *domains: Domain) -> None:
    if plane.domain not in domains:
        names = ", ".join(d.value for d in domains)
        raise InvalidArgument(f"expected {names} plane, got {plane.domain.value}")


def same_shape(planes) -> tuple[int, int]:
    shapes = {p.shape for p in planes}
    if len(shapes) != 1:
        raise InvalidArgument(f"planes differ in shape: {sorted(shapes)}")
    return shapes.pop()
