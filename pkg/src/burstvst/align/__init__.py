from .coarse_to_fine import (
    AlignConfig,
    AlignDiagnostics,
    BlockFlow,
    align_burst,
    block_homography_flow,
    format_diagnostics,
    global_homography,
)
from .features import Keypoint, brief_describe, detect_fast, match_descriptors
from .homography import estimate_homography
from .pyramid import Pyramid, build_pyramid
from .tiles import TileFlow, tile_block_match, warp_homography, warp_tiles

__all__ = [
    "AlignConfig", "AlignDiagnostics", "BlockFlow", "Keypoint", "Pyramid", "TileFlow",
    "align_burst", "block_homography_flow", "brief_describe", "build_pyramid", "detect_fast",
    "estimate_homography", "format_diagnostics", "global_homography", "match_descriptors",
    "tile_block_match", "warp_homography", "warp_tiles",
]
