"""FAST-9 corners, BRIEF-256 descriptors and Hamming matching."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.ndimage import maximum_filter, uniform_filter

from ..plane import ImagePlane

# Bresenham circle of radius 3, clockwise from 12 o'clock, as (dx, dy).
RING = (
    (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
)
ARC = 9

BRIEF_BITS = 256
BRIEF_HALF = 15  # patch is 31x31
BRIEF_SMOOTH = 5  # box blur of radius 2
_BRIEF_SEED = 0x42524945


class Keypoint(NamedTuple):
    x: int
    y: int
    score: float


def _arc_mask(flags: np.ndarray) -> np.ndarray:
    # flags: (16, h, w) bool; true where ARC contiguous ring pixels are set
    ext = np.concatenate([flags, flags[: ARC - 1]], axis=0).astype(np.int16)
    cs = np.concatenate([np.zeros((1,) + ext.shape[1:], np.int16), np.cumsum(ext, axis=0)], axis=0)
    window = cs[ARC:ARC + 16] - cs[:16]
    return (window == ARC).any(axis=0)


def default_threshold(data: np.ndarray) -> float:
    """10% of the robust (1st-99th percentile) dynamic range."""
    lo, hi = np.percentile(data, [1, 99])
    return 0.1 * float(hi - lo)


def fast_scores(data: np.ndarray, threshold: float) -> np.ndarray:
    """FAST-9 corner score per pixel; zero where the segment test fails."""
    img = np.asarray(data, dtype=np.float64)
    h, w = img.shape
    score = np.zeros((h, w))
    if h < 7 or w < 7:
        return score
    c = img[3:h - 3, 3:w - 3]
    ring = np.stack([img[3 + dy:h - 3 + dy, 3 + dx:w - 3 + dx] for dx, dy in RING])
    bright = ring > c + threshold
    dark = ring < c - threshold
    corner = _arc_mask(bright) | _arc_mask(dark)
    sb = np.where(bright, ring - c - threshold, 0.0).sum(axis=0)
    sd = np.where(dark, c - ring - threshold, 0.0).sum(axis=0)
    score[3:h - 3, 3:w - 3] = np.where(corner, np.maximum(sb, sd), 0.0)
    return score


def detect_fast(img: ImagePlane, threshold: float | None = None, max_points: int = 500) -> list[Keypoint]:
    data = img.data
    if threshold is None:
        threshold = default_threshold(data)
    score = fast_scores(data, threshold)
    peak = (score > 0) & (score >= maximum_filter(score, size=3, mode="constant"))
    ys, xs = np.nonzero(peak)
    s = score[ys, xs]
    order = np.lexsort((xs, ys, -s))[:max_points]
    return [Keypoint(int(xs[i]), int(ys[i]), float(s[i])) for i in order]


def brief_pattern() -> np.ndarray:
    """Fixed (256, 4) array of (dx1, dy1, dx2, dy2) sample offsets."""
    rng = np.random.default_rng(_BRIEF_SEED)
    pairs = []
    while len(pairs) < BRIEF_BITS:
        p = np.clip(np.rint(rng.normal(0.0, (2 * BRIEF_HALF + 1) / 5.0, size=4)), -BRIEF_HALF, BRIEF_HALF).astype(int)
        if p[0] == p[2] and p[1] == p[3]:
            continue
        pairs.append(p)
    return np.array(pairs)


_PATTERN = brief_pattern()


def brief_describe(img: ImagePlane, keypoints) -> tuple[list[Keypoint], np.ndarray]:
    """256-bit descriptors as a (n, 256) bool array, one row per kept keypoint.

    Keypoints closer than 15 px to the border are dropped.
    """
    data = np.asarray(img.data, dtype=np.float64)
    h, w = data.shape
    kept = [k for k in keypoints
            if BRIEF_HALF <= k.x < w - BRIEF_HALF and BRIEF_HALF <= k.y < h - BRIEF_HALF]
    if not kept:
        return [], np.zeros((0, BRIEF_BITS), dtype=bool)
    smooth = uniform_filter(data, size=BRIEF_SMOOTH, mode="nearest")
    xs = np.array([k.x for k in kept])[:, None]
    ys = np.array([k.y for k in kept])[:, None]
    a = smooth[ys + _PATTERN[:, 1], xs + _PATTERN[:, 0]]
    b = smooth[ys + _PATTERN[:, 3], xs + _PATTERN[:, 2]]
    return kept, a < b


def hamming_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    fa = a.astype(np.float32)
    fb = b.astype(np.float32)
    d = fa @ (1.0 - fb).T + (1.0 - fa) @ fb.T
    return np.rint(d).astype(np.int32)


def match_descriptors(a: np.ndarray, b: np.ndarray, ratio: float = 0.8, allowed: np.ndarray | None = None):
    """Mutual nearest neighbours under Hamming distance with a ratio test.

    ``allowed`` optionally masks out candidate pairs (shape ``(len(a), len(b))``).
    Ties go to the lower index.  Returns a list of ``(index_a, index_b)``.
    """
    if len(a) == 0 or len(b) == 0:
        return []
    d = hamming_matrix(a, b).astype(np.float64)
    if allowed is not None:
        d = np.where(allowed, d, np.inf)
    best_b = np.argmin(d, axis=1)
    best_a = np.argmin(d, axis=0)
    pairs = []
    for i, j in enumerate(best_b):
        best = d[i, j]
        if not np.isfinite(best) or best_a[j] != i:
            continue
        if d.shape[1] > 1:
            second = np.partition(d[i], 1)[1]
            if np.isfinite(second) and not best < ratio * second:
                continue
        pairs.append((i, int(j)))
    return pairs
