"""Normalized-DLT homographies fitted by RANSAC.

A homography ``H`` maps reference-frame pixel coordinates ``(x, y)`` to the
alternate frame; the alternate sample at ``H @ p`` depicts the reference
pixel at ``p``.
"""
from __future__ import annotations

import numpy as np

from ..errors import HomographyFailure, InsufficientFeatures, InvalidArgument

DET_EPS = 1e-12


def normalize(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if abs(h[2, 2]) < 1e-15:
        raise InvalidArgument("homography with h33 == 0 cannot be normalized")
    return h / h[2, 2]


def check_invertible(h: np.ndarray) -> None:
    if not np.all(np.isfinite(h)) or abs(np.linalg.det(h)) <= DET_EPS:
        raise InvalidArgument("homography is not invertible")


def translation(dx: float, dy: float) -> np.ndarray:
    return np.array([[1.0, 0.0, dx], [0.0, 1.0, dy], [0.0, 0.0, 1.0]])


# One coarse pixel covers fine pixels 2i and 2i+1, so its centre sits at 2i + 0.5.
_UP = np.array([[2.0, 0.0, 0.5], [0.0, 2.0, 0.5], [0.0, 0.0, 1.0]])
_UP_INV = np.linalg.inv(_UP)


def rescale(h: np.ndarray, levels: int) -> np.ndarray:
    """Express a homography ``levels`` pyramid steps finer (negative = coarser)."""
    s = np.linalg.matrix_power(_UP if levels >= 0 else _UP_INV, abs(levels))
    return normalize(s @ h @ np.linalg.inv(s))


def apply(h: np.ndarray, pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=np.float64)
    q = pts @ h[:, :2].T + h[:, 2]
    return q[..., :2] / q[..., 2:3]


def _hartley(pts):
    c = pts.mean(axis=0)
    d = np.sqrt(((pts - c) ** 2).sum(axis=1)).mean()
    s = np.sqrt(2.0) / d if d > 0 else 1.0
    return np.array([[s, 0.0, -s * c[0]], [0.0, s, -s * c[1]], [0.0, 0.0, 1.0]])


def dlt(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """Least-squares DLT on >= 4 correspondences with Hartley normalization."""
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    ts, td = _hartley(src), _hartley(dst)
    s = apply(ts, src)
    d = apply(td, dst)
    n = len(s)
    a = np.zeros((2 * n, 9))
    x, y = s[:, 0], s[:, 1]
    u, v = d[:, 0], d[:, 1]
    a[0::2, 0], a[0::2, 1], a[0::2, 2] = x, y, 1.0
    a[0::2, 6], a[0::2, 7], a[0::2, 8] = -u * x, -u * y, -u
    a[1::2, 3], a[1::2, 4], a[1::2, 5] = x, y, 1.0
    a[1::2, 6], a[1::2, 7], a[1::2, 8] = -v * x, -v * y, -v
    _, _, vt = np.linalg.svd(a)
    hn = vt[-1].reshape(3, 3)
    return normalize(np.linalg.inv(td) @ hn @ ts)


def _collinear(p, tol=1e-6):
    for i, j, k in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
        e1, e2 = p[j] - p[i], p[k] - p[i]
        scale = max(np.abs(e1).max(), np.abs(e2).max(), 1.0)
        if abs(e1[0] * e2[1] - e1[1] * e2[0]) <= tol * scale * scale:
            return True
    return False


def reprojection_error(h, src, dst):
    with np.errstate(divide="ignore", invalid="ignore"):
        err = np.linalg.norm(apply(h, src) - dst, axis=1)
    return np.where(np.isfinite(err), err, np.inf)


def _needed_draws(w: float, confidence: float) -> int:
    p = w ** 4
    if p >= 1.0:
        return 1
    if p <= 0.0:
        return np.iinfo(np.int64).max
    return int(np.ceil(np.log1p(-confidence) / np.log1p(-p)))


def estimate_homography(src, dst, iters: int = 500, inlier_px: float = 3.0, min_inliers: int = 8,
                        seed: int = 0, return_inliers: bool = False, confidence: float = 0.999):
    """RANSAC over 4-point samples, then a refit on all inliers.

    Sampling stops early once the best inlier ratio ``w`` makes an all-inlier
    draw likely at ``confidence`` (adaptive bound ``log(1-c) / log(1-w^4)``),
    and never exceeds ``iters`` draws.

    Raises :class:`InsufficientFeatures` for fewer than 4 pairs and
    :class:`HomographyFailure` when the best model has fewer than
    ``min_inliers`` supporters.
    """
    src = np.asarray(src, dtype=np.float64).reshape(-1, 2)
    dst = np.asarray(dst, dtype=np.float64).reshape(-1, 2)
    n = len(src)
    if len(dst) != n:
        raise InvalidArgument("src and dst must have the same length")
    if n < 4:
        raise InsufficientFeatures(f"need >= 4 correspondences, got {n}")
    rng = np.random.default_rng(seed)
    best_mask, best_key = None, None
    budget = iters
    it = 0
    while it < budget:
        it += 1
        idx = rng.choice(n, size=4, replace=False)
        if _collinear(src[idx]) or _collinear(dst[idx]):
            continue
        try:
            h = dlt(src[idx], dst[idx])
        except (np.linalg.LinAlgError, InvalidArgument):
            continue
        if abs(np.linalg.det(h)) <= DET_EPS:
            continue
        err = reprojection_error(h, src, dst)
        mask = err < inlier_px
        key = (int(mask.sum()), -float(np.minimum(err, inlier_px).sum()))
        if best_key is None or key > best_key:
            best_key, best_mask = key, mask
            budget = min(budget, _needed_draws(key[0] / n, confidence))
    if best_mask is None or best_mask.sum() < min_inliers:
        got = 0 if best_mask is None else int(best_mask.sum())
        raise HomographyFailure(f"only {got} inliers, need {min_inliers}")
    mask = best_mask
    h = dlt(src[mask], dst[mask])
    for _ in range(2):
        new = reprojection_error(h, src, dst) < inlier_px
        if new.sum() < min_inliers or np.array_equal(new, mask):
            break
        mask = new
        h = dlt(src[mask], dst[mask])
    check_invertible(h)
    return (h, mask) if return_inliers else h
