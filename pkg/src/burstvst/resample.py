"""Factor-2 resampling shared by the alignment pyramid and the fusion scales."""
from __future__ import annotations

import numpy as np

from .errors import InvalidArgument


def box_down_floor(a: np.ndarray) -> np.ndarray:
    """2x2 box average; a trailing odd row/column is dropped."""
    h, w = a.shape[0] // 2 * 2, a.shape[1] // 2 * 2
    a = np.asarray(a[:h, :w], dtype=np.float64)
    return 0.25 * (a[0::2, 0::2] + a[1::2, 0::2] + a[0::2, 1::2] + a[1::2, 1::2])


def down2(a: np.ndarray) -> np.ndarray:
    """2x2 average (factor-2 bilinear); odd sizes are first padded by edge replication."""
    a = np.asarray(a, dtype=np.float64)
    ph, pw = a.shape[0] % 2, a.shape[1] % 2
    if ph or pw:
        a = np.pad(a, ((0, ph), (0, pw)), mode="edge")
    return box_down_floor(a)


def _up_axis(a: np.ndarray, axis: int) -> np.ndarray:
    a = np.moveaxis(a, axis, 0)
    p = np.concatenate([a[:1], a, a[-1:]], axis=0)
    centre = p[1:-1]
    even = 0.75 * centre + 0.25 * p[:-2]
    odd = 0.75 * centre + 0.25 * p[2:]
    out = np.empty((2 * a.shape[0],) + a.shape[1:], dtype=np.float64)
    out[0::2] = even
    out[1::2] = odd
    return np.moveaxis(out, 0, axis)


def up2(a: np.ndarray, shape: tuple[int, int] | None = None) -> np.ndarray:
    """Bilinear x2 upsample with half-pixel alignment and edge clamp, cropped to ``shape``."""
    out = _up_axis(_up_axis(np.asarray(a, dtype=np.float64), 0), 1)
    if shape is not None:
        if shape[0] > out.shape[0] or shape[1] > out.shape[1]:
            raise InvalidArgument(f"cannot crop {out.shape} upsample to {shape}")
        out = out[: shape[0], : shape[1]]
    return out


def half_shape(shape: tuple[int, int]) -> tuple[int, int]:
    """Output shape of :func:`down2`."""
    return (shape[0] + 1) // 2, (shape[1] + 1) // 2
