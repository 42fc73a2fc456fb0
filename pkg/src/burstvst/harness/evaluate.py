"""Scoring alignment output against the synthetic ground-truth motion."""
from __future__ import annotations

import numpy as np

from ..align import homography as hg
from ..align.coarse_to_fine import AlignDiagnostics
from ..align.tiles import TileFlow, tile_centres


def flow_errors(flow: TileFlow, motion: np.ndarray, shape, level: int = 0) -> np.ndarray:
    """Per-tile distance between the estimated vector and the true displacement at the tile centre.

    ``motion`` is the full-resolution ref -> alt homography; ``shape`` is the
    image shape at ``level``.
    """
    c = tile_centres(shape, flow.tile_size)
    h = hg.rescale(motion, -level) if level else motion
    return np.linalg.norm(flow.flow - (hg.apply(h, c) - c), axis=-1)


def interior(a: np.ndarray) -> np.ndarray:
    """Drop the outermost ring of tiles, where displaced content leaves the frame."""
    return a[1:-1, 1:-1] if min(a.shape[:2]) > 2 else a


def tile_recovery(diag: AlignDiagnostics, motions, shape, tol_px: float = 1.0) -> list[float]:
    """Fraction of interior level-0 tiles within ``tol_px`` of the truth, one value per alternate."""
    out = []
    for fd, m in zip(diag.frames, motions):
        e = interior(flow_errors(fd.flows[0], m, shape))
        out.append(float(np.mean(e <= tol_px)))
    return out
