"""Coarse-to-fine burst alignment.

Top pyramid level: one global homography from FAST/BRIEF matches.  Next
level: the plane is split into four quadrants, each with its own homography,
falling back to the parent when a block lacks matches.  Remaining levels:
integer tile search seeded by the coarser estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..burst import Burst, Layout, green_average, pack_rggb, unpack_rggb
from ..errors import HomographyFailure, InvalidArgument
from ..plane import ImagePlane, same_shape
from . import homography as hg
from .features import brief_describe, detect_fast, match_descriptors
from .pyramid import build_pyramid
from .tiles import TileFlow, grid_shape, tile_block_match, tile_centres, neighbour_flows, upscale_flow, warp_tiles

# read-noise variance (at gain-normalized scale) above which tiles grow to 32 px
LOW_LIGHT_ACUTE_SIGMA_SQ = 1.0


@dataclass(frozen=True)
class AlignConfig:
    levels: int = 4
    tile_size: int | None = None  # None: 16, or 32 in extreme low light
    radius: int = 2
    fast_threshold: float | None = None
    max_points: int = 500
    ratio: float = 0.8
    ransac_iters: int = 500
    inlier_px: float = 3.0
    min_inliers: int = 8
    block_gate_px: float = 6.0
    seed: int = 0

    def resolve_tile(self, acute_sigma_sq: float | None) -> int:
        if self.tile_size is not None:
            if self.tile_size not in (16, 32):
                raise InvalidArgument(f"tile size must be 16 or 32, got {self.tile_size}")
            return self.tile_size
        if acute_sigma_sq is not None and acute_sigma_sq > LOW_LIGHT_ACUTE_SIGMA_SQ:
            return 32
        return 16


@dataclass(frozen=True, eq=False)
class BlockFlow:
    """2x2 quadrant homographies at one level; ``fallback`` marks parent substitutes."""

    homographies: np.ndarray  # (2, 2, 3, 3)
    fallback: np.ndarray  # (2, 2) bool
    inliers: np.ndarray  # (2, 2) int
    split: tuple[int, int]  # (row, col) where the quadrants meet

    def block_of(self, x, y):
        return (np.asarray(y) >= self.split[0]).astype(int), (np.asarray(x) >= self.split[1]).astype(int)


@dataclass
class FrameDiagnostics:
    global_h: np.ndarray
    global_fallback: bool
    global_inliers: int
    blocks: BlockFlow | None
    flows: dict[int, TileFlow] = field(default_factory=dict)
    homography_init: TileFlow | None = None


@dataclass
class AlignDiagnostics:
    levels: int
    tile_size: int
    radius: int
    frames: list[FrameDiagnostics] = field(default_factory=list)


def _features(img: ImagePlane, cfg: AlignConfig):
    kps = detect_fast(img, cfg.fast_threshold, cfg.max_points)
    kps, desc = brief_describe(img, kps)
    xy = np.array([(k.x, k.y) for k in kps], dtype=np.float64).reshape(-1, 2)
    return xy, desc


def global_homography(ref: ImagePlane, alt: ImagePlane, cfg: AlignConfig = AlignConfig(), feats=None):
    """Homography ref -> alt from feature matches over the whole plane; returns (H, n_inliers)."""
    rxy, rd = feats if feats is not None else _features(ref, cfg)
    axy, ad = _features(alt, cfg)
    pairs = match_descriptors(rd, ad, cfg.ratio)
    if len(pairs) < 4:
        raise HomographyFailure(f"only {len(pairs)} feature matches")
    i, j = np.array(pairs).T
    h, mask = hg.estimate_homography(rxy[i], axy[j], cfg.ransac_iters, cfg.inlier_px, cfg.min_inliers,
                                     cfg.seed, return_inliers=True)
    return h, int(mask.sum())


def block_homography_flow(ref_level: ImagePlane, alt_level: ImagePlane, parent: np.ndarray,
                          cfg: AlignConfig = AlignConfig(), parent_levels_up: int = 1, feats=None) -> BlockFlow:
    """Per-quadrant homographies; ``parent`` is given ``parent_levels_up`` levels coarser."""
    hg.check_invertible(parent)
    base = hg.rescale(parent, parent_levels_up)
    rxy, rd = feats if feats is not None else _features(ref_level, cfg)
    axy, ad = _features(alt_level, cfg)
    split = (ref_level.height // 2, ref_level.width // 2)
    hs = np.tile(base, (2, 2, 1, 1))
    fallback = np.ones((2, 2), dtype=bool)
    inliers = np.zeros((2, 2), dtype=int)
    if len(rxy) and len(axy):
        pred = hg.apply(base, rxy)
        gate = np.linalg.norm(pred[:, None, :] - axy[None, :, :], axis=-1) <= cfg.block_gate_px
        by = (rxy[:, 1] >= split[0]).astype(int)
        bx = (rxy[:, 0] >= split[1]).astype(int)
        for qy in range(2):
            for qx in range(2):
                sel = np.nonzero((by == qy) & (bx == qx))[0]
                if len(sel) < 4:
                    continue
                pairs = match_descriptors(rd[sel], ad, cfg.ratio, allowed=gate[sel])
                if len(pairs) < cfg.min_inliers:
                    continue
                i, j = np.array(pairs).T
                try:
                    h, mask = hg.estimate_homography(rxy[sel[i]], axy[j], cfg.ransac_iters, cfg.inlier_px,
                                                     cfg.min_inliers, cfg.seed, return_inliers=True)
                except (HomographyFailure, InvalidArgument):
                    continue
                hs[qy, qx] = h
                fallback[qy, qx] = False
                inliers[qy, qx] = int(mask.sum())
    return BlockFlow(hs, fallback, inliers, split)


def homography_tile_init(blocks: BlockFlow, shape, tile: int, levels_down: int) -> TileFlow:
    """Round the homography flow at each tile centre to an integer tile vector."""
    c = tile_centres(shape, tile)
    s = np.linalg.matrix_power(hg._UP, levels_down)
    c_block = hg.apply(np.linalg.inv(s), c)
    by, bx = blocks.block_of(c_block[..., 0], c_block[..., 1])
    out = np.zeros(c.shape[:2] + (2,), dtype=np.int64)
    for qy in range(2):
        for qx in range(2):
            m = (by == qy) & (bx == qx)
            if not m.any():
                continue
            h = hg.rescale(blocks.homographies[qy, qx], levels_down)
            out[m] = np.rint(hg.apply(h, c[m]) - c[m]).astype(np.int64)
    return TileFlow(tile, out)


def _homography_levels(levels: int):
    """(global level, block level or None, first tile-matching level)."""
    top = levels - 1
    if levels >= 3:
        return top, top - 1, top - 2
    return top, None, top - 1


def align_pair(ref_pyr, alt_pyr, cfg: AlignConfig, tile: int, ref_feats=None) -> tuple[TileFlow, FrameDiagnostics]:
    levels = len(ref_pyr)
    top, block_level, first_bm = _homography_levels(levels)
    ref_feats = ref_feats or {}
    try:
        gh, gin = global_homography(ref_pyr[top], alt_pyr[top], cfg, ref_feats.get(top))
        gfb = False
    except HomographyFailure:
        gh, gin, gfb = np.eye(3), 0, True
    if block_level is not None:
        blocks = block_homography_flow(ref_pyr[block_level], alt_pyr[block_level], gh, cfg, 1,
                                       ref_feats.get(block_level))
        anchor = block_level
    else:
        ref_shape = ref_pyr[top].shape
        blocks = BlockFlow(np.tile(gh, (2, 2, 1, 1)), np.ones((2, 2), bool), np.zeros((2, 2), int),
                           (ref_shape[0] // 2, ref_shape[1] // 2))
        anchor = top
    diag = FrameDiagnostics(gh, gfb, gin, blocks if block_level is not None else None)
    init = homography_tile_init(blocks, ref_pyr[first_bm].shape, tile, anchor - first_bm)
    diag.homography_init = init
    flow, extra = None, ()
    for lvl in range(first_bm, -1, -1):
        if flow is not None:
            init = upscale_flow(flow, ref_pyr[lvl].shape, tile)
            extra = neighbour_flows(flow, ref_pyr[lvl].shape, tile)
        flow = tile_block_match(ref_pyr[lvl], alt_pyr[lvl], tile, cfg.radius, init, extra)
        diag.flows[lvl] = flow
    return flow, diag


def flow_bound(radius: int, levels: int) -> int:
    """Largest per-axis deviation of the level-0 flow from the doubled homography seed.

    Holds where the seed is the same across neighbouring tiles; the neighbour
    candidates can otherwise carry in the neighbour's seed difference as well.
    """
    first_bm = _homography_levels(levels)[2]
    return radius * (2 ** (first_bm + 1) - 1)


def _align_planes(ref: ImagePlane, alts, cfg: AlignConfig, tile: int):
    ref_pyr = build_pyramid(ref, cfg.levels)
    top, block_level, _ = _homography_levels(cfg.levels)
    feats = {lvl: _features(ref_pyr[lvl], cfg) for lvl in (top, block_level) if lvl is not None}
    out = []
    for alt in alts:
        alt_pyr = build_pyramid(alt, cfg.levels)
        out.append(align_pair(ref_pyr, alt_pyr, cfg, tile, feats))
    return out


def align_burst(burst: Burst, cfg: AlignConfig = AlignConfig()) -> tuple[Burst, AlignDiagnostics]:
    """Warp every alternate onto the reference; the reference is returned unchanged.

    Bayer bursts are matched on the half-resolution green average and the
    resulting flow is applied to each of the four colour planes.
    """
    if len(burst) < 2:
        raise InvalidArgument("alignment needs at least two frames")
    same_shape(burst.frames)
    s2 = burst.params.acute_sigma_sq if burst.params is not None and burst.params.sigma_s > 0 else None
    tile = cfg.resolve_tile(s2)
    diag = AlignDiagnostics(cfg.levels, tile, cfg.radius)
    if burst.layout is Layout.BAYER_RGGB:
        packed = [pack_rggb(f.data) for f in burst.frames]
        luma = [burst.reference.with_data(green_average(p)) for p in packed]
        results = _align_planes(luma[0], luma[1:], cfg, tile)
        warped = []
        for alt, p, (flow, fd) in zip(burst.alternates, packed[1:], results):
            planes = np.stack([warp_tiles(alt.with_data(c), flow).data for c in p])
            warped.append(alt.with_data(unpack_rggb(planes)))
            diag.frames.append(fd)
    else:
        results = _align_planes(burst.reference, burst.alternates, cfg, tile)
        warped = []
        for alt, (flow, fd) in zip(burst.alternates, results):
            warped.append(warp_tiles(alt, flow))
            diag.frames.append(fd)
    return replace(burst, alternates=tuple(warped)), diag


def format_diagnostics(diag: AlignDiagnostics) -> str:
    """Line-oriented text dump: one record per line, whitespace separated."""
    lines = [f"levels {diag.levels}", f"tile_size {diag.tile_size}", f"radius {diag.radius}"]
    fmt = lambda h: " ".join(f"{v:.9g}" for v in np.asarray(h).ravel())  # noqa: E731
    for n, fd in enumerate(diag.frames, start=1):
        lines.append(f"frame {n}")
        lines.append(f"global fallback={int(fd.global_fallback)} inliers={fd.global_inliers} H {fmt(fd.global_h)}")
        if fd.blocks is not None:
            for qy in range(2):
                for qx in range(2):
                    lines.append(f"block {qy} {qx} fallback={int(fd.blocks.fallback[qy, qx])} "
                                 f"inliers={fd.blocks.inliers[qy, qx]} H {fmt(fd.blocks.homographies[qy, qx])}")
        for lvl in sorted(fd.flows, reverse=True):
            f = fd.flows[lvl].flow
            for r in range(f.shape[0]):
                row = " ".join(f"{dx},{dy}" for dx, dy in f[r])
                lines.append(f"flow {lvl} {r} {row}")
    return "\n".join(lines) + "\n"
