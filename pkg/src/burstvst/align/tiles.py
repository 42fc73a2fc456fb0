"""Integer tile displacement search and the warps that apply motion."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgument
from ..plane import ImagePlane
from . import homography as hg


@dataclass(frozen=True, eq=False)
class TileFlow:
    """One integer ``(dx, dy)`` per tile, stored as an int array of shape (rows, cols, 2).

    The alternate sample at ``p + (dx, dy)`` matches the reference pixel ``p``.
    """

    tile_size: int
    flow: np.ndarray

    @property
    def grid_shape(self) -> tuple[int, int]:
        return self.flow.shape[:2]

    def per_pixel(self, shape) -> np.ndarray:
        t = self.tile_size
        return np.repeat(np.repeat(self.flow, t, axis=0), t, axis=1)[: shape[0], : shape[1]]


def grid_shape(shape, tile: int) -> tuple[int, int]:
    return -(-shape[0] // tile), -(-shape[1] // tile)


def zero_flow(shape, tile: int) -> TileFlow:
    return TileFlow(tile, np.zeros(grid_shape(shape, tile) + (2,), dtype=np.int64))


def _tile_sum(a: np.ndarray, tile: int, grid) -> np.ndarray:
    gh, gw = grid
    pad = np.zeros((gh * tile, gw * tile), dtype=a.dtype)
    pad[: a.shape[0], : a.shape[1]] = a
    return pad.reshape(gh, tile, gw, tile).sum(axis=(1, 3))


def _tile_cost(r, a, base, ox, oy, tile, grid):
    h, w = r.shape
    yy, xx = np.mgrid[0:h, 0:w]
    sx = xx + base[..., 0] + ox
    sy = yy + base[..., 1] + oy
    valid = (sx >= 0) & (sx < w) & (sy >= 0) & (sy < h)
    diff = np.abs(r - a[np.clip(sy, 0, h - 1), np.clip(sx, 0, w - 1)]) * valid
    cnt = _tile_sum(valid.astype(np.float64), tile, grid)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(cnt > 0, _tile_sum(diff, tile, grid) / cnt, np.inf)


def tile_block_match(ref: ImagePlane, alt: ImagePlane, tile: int = 16, radius: int = 2,
                     init: TileFlow | None = None, candidates=()) -> TileFlow:
    """Per-tile L1 search over ``init +- radius``.

    The cost is the mean absolute difference over the pixels whose displaced
    position is inside the alternate.  Equal costs resolve to the smallest
    ``|dx| + |dy|``, then the lexicographically smallest ``(dx, dy)``.

    ``candidates`` are extra initial flows on the same grid.  Each tile starts
    from whichever of ``init`` and its candidates has the lowest cost (earlier
    wins ties) before the search.
    """
    if ref.shape != alt.shape:
        raise InvalidArgument(f"shape mismatch {ref.shape} vs {alt.shape}")
    grid = grid_shape(ref.shape, tile)
    if init is None:
        init = zero_flow(ref.shape, tile)
    for f in (init, *candidates):
        if f.tile_size != tile or f.grid_shape != grid:
            raise InvalidArgument(f"init flow grid {f.grid_shape}@{f.tile_size} incompatible with {grid}@{tile}")
    r = np.asarray(ref.data, dtype=np.float64)
    a = np.asarray(alt.data, dtype=np.float64)
    start = init.flow
    if candidates:
        seeds = np.stack([init.flow] + [c.flow for c in candidates])
        c0 = np.stack([_tile_cost(r, a, TileFlow(tile, f).per_pixel(ref.shape), 0, 0, tile, grid) for f in seeds])
        best = np.argmin(c0, axis=0)
        start = np.take_along_axis(seeds, best[None, ..., None], axis=0)[0]
    base = TileFlow(tile, start).per_pixel(ref.shape)
    offsets = [(ox, oy) for oy in range(-radius, radius + 1) for ox in range(-radius, radius + 1)]
    costs = np.stack([_tile_cost(r, a, base, ox, oy, tile, grid) for ox, oy in offsets])
    off = np.array(offsets)
    vx = start[None, ..., 0] + off[:, 0, None, None]
    vy = start[None, ..., 1] + off[:, 1, None, None]
    order = np.lexsort((vy, vx, np.abs(vx) + np.abs(vy), costs), axis=0)[0]
    pick = np.take_along_axis(np.stack([vx, vy], axis=-1), order[None, ..., None], axis=0)[0]
    return TileFlow(tile, pick.astype(np.int64))


def _parent_index(n_fine: int, tile: int, coarse_tile: int, n_coarse: int):
    """Parent tile of each fine tile and the parent's neighbour nearest the fine centre."""
    c = (np.arange(n_fine) * tile + tile / 2.0) / 2.0
    own = np.minimum((c // coarse_tile).astype(int), n_coarse - 1)
    side = np.where(c - own * coarse_tile < coarse_tile / 2.0, -1, 1)
    return own, np.clip(own + side, 0, n_coarse - 1)


def upscale_flow(coarse: TileFlow, fine_shape, tile: int) -> TileFlow:
    """Initial flow one pyramid level finer: vectors doubled, tiles looked up by centre."""
    gh, gw = grid_shape(fine_shape, tile)
    cy = _parent_index(gh, tile, coarse.tile_size, coarse.grid_shape[0])[0]
    cx = _parent_index(gw, tile, coarse.tile_size, coarse.grid_shape[1])[0]
    return TileFlow(tile, 2 * coarse.flow[cy[:, None], cx[None, :]])


def neighbour_flows(coarse: TileFlow, fine_shape, tile: int) -> tuple[TileFlow, TileFlow]:
    """Doubled vectors of the parent's nearest horizontal and vertical neighbours.

    Used as alternative starting points where a parent tile straddles a motion
    or content boundary.
    """
    gh, gw = grid_shape(fine_shape, tile)
    cy, ny = _parent_index(gh, tile, coarse.tile_size, coarse.grid_shape[0])
    cx, nx = _parent_index(gw, tile, coarse.tile_size, coarse.grid_shape[1])
    return (TileFlow(tile, 2 * coarse.flow[cy[:, None], nx[None, :]]),
            TileFlow(tile, 2 * coarse.flow[ny[:, None], cx[None, :]]))


def tile_centres(shape, tile: int) -> np.ndarray:
    """(rows, cols, 2) pixel centres (x, y) of each tile, clipped to the image."""
    gh, gw = grid_shape(shape, tile)
    x = np.minimum(np.arange(gw) * tile + (tile - 1) / 2.0, shape[1] - 1)
    y = np.minimum(np.arange(gh) * tile + (tile - 1) / 2.0, shape[0] - 1)
    return np.stack(np.meshgrid(x, y), axis=-1)


def warp_tiles(img: ImagePlane, flow: TileFlow) -> ImagePlane:
    """Shift every tile by its integer vector; samples outside the frame clamp to the edge."""
    h, w = img.shape
    if flow.grid_shape != grid_shape(img.shape, flow.tile_size):
        raise InvalidArgument("flow grid does not match image")
    d = flow.per_pixel(img.shape)
    yy, xx = np.mgrid[0:h, 0:w]
    sx = np.clip(xx + d[..., 0], 0, w - 1)
    sy = np.clip(yy + d[..., 1], 0, h - 1)
    return img.with_data(img.data[sy, sx])


def bilinear_sample(data: np.ndarray, sx: np.ndarray, sy: np.ndarray) -> np.ndarray:
    h, w = data.shape
    sx = np.clip(sx, 0.0, w - 1.0)
    sy = np.clip(sy, 0.0, h - 1.0)
    x0 = np.minimum(np.floor(sx).astype(np.int64), w - 1)
    y0 = np.minimum(np.floor(sy).astype(np.int64), h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = sx - x0
    fy = sy - y0
    d = np.asarray(data, dtype=np.float64)
    top = d[y0, x0] * (1.0 - fx) + d[y0, x1] * fx
    bot = d[y1, x0] * (1.0 - fx) + d[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def warp_homography(img: ImagePlane, h: np.ndarray) -> ImagePlane:
    """out(p) = img(H p), bilinear with edge clamp."""
    h = np.asarray(h, dtype=np.float64)
    hg.check_invertible(h)
    h = hg.normalize(h)
    if np.array_equal(h, np.eye(3)):
        return img.with_data(img.data.copy())
    rows, cols = img.shape
    yy, xx = np.mgrid[0:rows, 0:cols].astype(np.float64)
    q = hg.apply(h, np.stack([xx, yy], axis=-1))
    return img.with_data(bilinear_sample(img.data, q[..., 0], q[..., 1]))
