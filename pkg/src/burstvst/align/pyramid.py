from __future__ import annotations

from dataclasses import dataclass

from ..errors import InvalidArgument
from ..plane import ImagePlane
from ..resample import box_down_floor


@dataclass(frozen=True)
class Pyramid:
    """``levels[0]`` is full resolution; each level is the 2x2 box average of the previous."""

    levels: tuple[ImagePlane, ...]

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, k) -> ImagePlane:
        return self.levels[k]


def build_pyramid(img: ImagePlane, levels: int = 4) -> Pyramid:
    if levels < 2:
        raise InvalidArgument(f"pyramid needs at least 2 levels, got {levels}")
    need = 2 ** (levels - 1)
    if img.height < need or img.width < need:
        raise InvalidArgument(f"{img.width}x{img.height} image too small for {levels} levels (need >= {need})")
    out = [img]
    for _ in range(levels - 1):
        out.append(img.with_data(box_down_floor(out[-1].data)))
    return Pyramid(tuple(out))
