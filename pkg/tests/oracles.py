"""Independent reference computations used by the tests.

Nothing here imports the package's numerical code paths.
"""
import math

import numpy as np
from scipy import stats
from scipy.integrate import simpson


def ft(z, s2, g=0.0):
    return np.sqrt(np.maximum(z + s2 - g, 0.0)) + np.sqrt(np.maximum(z + 1.0 + s2 - g, 0.0))


def gat(z, s2, g=0.0):
    return 2.0 * np.sqrt(np.maximum(z + 0.375 + s2 - g, 0.0))


def transformed_variance(fn, m, s2, g=0.0, n_grid=40001):
    """Var[fn(K + Z)] with K ~ Poisson(m), Z ~ N(g, s2): exact summation over K,
    fine Simpson quadrature over Z (the clamp makes fn non-smooth, so a
    Gauss rule is not accurate enough)."""
    kmax = int(m + 12 * math.sqrt(m + 1) + 20)
    k = np.arange(kmax + 1, dtype=np.float64)
    pmf = stats.poisson.pmf(k, m)
    if s2 == 0:
        f = fn(k + g, s2, g)
        return float(pmf @ (f * f) - (pmf @ f) ** 2)
    sd = math.sqrt(s2)
    z = np.linspace(g - 12 * sd, g + 12 * sd, n_grid)
    phi = stats.norm.pdf(z, g, sd)
    f = fn(k[:, None] + z[None, :], s2, g)
    e1 = pmf @ simpson(f * phi, x=z, axis=1)
    e2 = pmf @ simpson(f * f * phi, x=z, axis=1)
    return float(e2 - e1 * e1)


def fast_oracle(img, threshold, arc=9):
    """Brute-force FAST segment test: set of (x, y) passing, plus the score at each."""
    ring = [(0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
            (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3)]
    h, w = img.shape
    out = {}
    for y in range(3, h - 3):
        for x in range(3, w - 3):
            c = img[y, x]
            vals = [img[y + dy, x + dx] for dx, dy in ring]
            hit = False
            for sign in (1, -1):
                flags = [sign * (v - c) > threshold for v in vals]
                for start in range(16):
                    if all(flags[(start + i) % 16] for i in range(arc)):
                        hit = True
            if hit:
                sb = sum(v - c - threshold for v in vals if v > c + threshold)
                sd = sum(c - v - threshold for v in vals if v < c - threshold)
                out[(x, y)] = max(sb, sd)
    return out


def dlt_homography(src, dst):
    """Plain (unnormalized) DLT via SVD, for well-conditioned synthetic data."""
    rows = []
    for (x, y), (u, v) in zip(src, dst):
        rows.append([-x, -y, -1, 0, 0, 0, u * x, u * y, u])
        rows.append([0, 0, 0, -x, -y, -1, v * x, v * y, v])
    _, _, vt = np.linalg.svd(np.asarray(rows, dtype=np.float64))
    h = vt[-1].reshape(3, 3)
    return h / h[2, 2]


def box_average(a):
    h, w = a.shape[0] // 2 * 2, a.shape[1] // 2 * 2
    out = np.zeros((h // 2, w // 2))
    for i in range(h // 2):
        for j in range(w // 2):
            out[i, j] = a[2 * i:2 * i + 2, 2 * j:2 * j + 2].mean()
    return out


def bilinear_up2_1d(v):
    """Half-pixel aligned x2 linear upsampling of a 1-D signal with edge clamp."""
    n = len(v)
    out = np.zeros(2 * n)
    for i in range(2 * n):
        src = (i + 0.5) / 2 - 0.5
        lo = math.floor(src)
        f = src - lo
        a = v[min(max(lo, 0), n - 1)]
        b = v[min(max(lo + 1, 0), n - 1)]
        out[i] = (1 - f) * a + f * b
    return out


def bilinear_up2(a):
    rows = np.array([bilinear_up2_1d(r) for r in a])
    return np.array([bilinear_up2_1d(c) for c in rows.T]).T


def block_match_oracle(ref, alt, tile, radius, init=(0, 0)):
    """Exhaustive per-tile search: mean abs difference over in-bounds pixels,
    ties to smaller |dx|+|dy| then lexicographic (dx, dy)."""
    h, w = ref.shape
    gh, gw = -(-h // tile), -(-w // tile)
    flow = np.zeros((gh, gw, 2), dtype=int)
    for r in range(gh):
        for c in range(gw):
            best = None
            for dx in range(init[0] - radius, init[0] + radius + 1):
                for dy in range(init[1] - radius, init[1] + radius + 1):
                    tot, cnt = 0.0, 0
                    for y in range(r * tile, min((r + 1) * tile, h)):
                        for x in range(c * tile, min((c + 1) * tile, w)):
                            xx, yy = x + dx, y + dy
                            if 0 <= xx < w and 0 <= yy < h:
                                tot += abs(ref[y, x] - alt[yy, xx])
                                cnt += 1
                    if cnt == 0:
                        continue
                    key = (tot / cnt, abs(dx) + abs(dy), dx, dy)
                    if best is None or key < best:
                        best = key
            flow[r, c] = best[2], best[3]
    return flow
