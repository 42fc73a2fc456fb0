"""Synthetic scenes and bursts with known motion."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from ..align import homography as hg
from ..align.tiles import warp_homography
from ..burst import Burst
from ..errors import InvalidArgument
from ..noise_model import NoiseParams, preset_params, synth_noise
from ..plane import Domain, ImagePlane


class Motion(enum.Enum):
    TRANSLATION = "translation"
    TRANSLATION_ROTATION = "translation_rotation"


@dataclass(frozen=True)
class SynthConfig:
    n_frames: int = 8
    shift_min: float = 2.0
    shift_max: float = 16.0
    motion: Motion = Motion.TRANSLATION
    max_rotation_deg: float = 0.0
    gain: float = 4.0
    preset: str = "kpn"
    params: NoiseParams | None = None  # overrides preset/gain when set
    noise: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_frames < 1:
            raise InvalidArgument("n_frames must be >= 1")
        if not self.shift_max >= self.shift_min >= 0:
            raise InvalidArgument(f"bad shift range ({self.shift_min}, {self.shift_max})")

    def noise_params(self) -> NoiseParams:
        return self.params if self.params is not None else preset_params(self.preset, self.gain)


def textured_scene(size=(512, 512), seed: int = 0, n_rects: int = 300) -> ImagePlane:
    """Rectangles (sharp corners) layered over multi-octave texture, values in [0.02, 0.98].

    Every 16 px tile carries texture, so integer block matching is well posed
    even at high noise.
    """
    h, w = size
    rng = np.random.default_rng(seed)
    img = np.zeros((h, w))
    for sigma, amp in ((16.0, 0.5), (6.0, 0.4), (2.5, 0.5), (1.2, 0.6)):
        layer = gaussian_filter(rng.standard_normal((h, w)), sigma)
        img += amp * layer / max(layer.std(), 1e-12)
    img = 0.45 + 0.1 * img
    scale = min(h, w)
    for _ in range(n_rects):
        rh = int(rng.integers(max(2, scale // 64), max(3, scale // 5)))
        rw = int(rng.integers(max(2, scale // 64), max(3, scale // 5)))
        y, x = int(rng.integers(0, h)), int(rng.integers(0, w))
        img[y:y + rh, x:x + rw] += rng.uniform(-0.2, 0.2)
    return ImagePlane(np.clip(img, 0.02, 0.98), Domain.RAW_LINEAR)


def random_motion(rng: np.random.Generator, cfg: SynthConfig, shape) -> np.ndarray:
    """Ref -> alt homography with translation magnitude uniform in [shift_min, shift_max]."""
    mag = rng.uniform(cfg.shift_min, cfg.shift_max)
    ang = rng.uniform(0.0, 2.0 * math.pi)
    t = hg.translation(mag * math.cos(ang), mag * math.sin(ang))
    if cfg.motion is Motion.TRANSLATION:
        return t
    theta = math.radians(rng.uniform(-cfg.max_rotation_deg, cfg.max_rotation_deg))
    cy, cx = (shape[0] - 1) / 2.0, (shape[1] - 1) / 2.0
    c, s = math.cos(theta), math.sin(theta)
    rot = hg.translation(cx, cy) @ np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]) @ hg.translation(-cx, -cy)
    return hg.normalize(t @ rot)


def move(clean: ImagePlane, motion: np.ndarray) -> ImagePlane:
    """Render the alternate view: alt(H p) = clean(p)."""
    return warp_homography(clean, np.linalg.inv(motion))


def motion_magnitude(motion: np.ndarray) -> float:
    return float(math.hypot(motion[0, 2], motion[1, 2]))


def synth_burst(clean: ImagePlane, cfg: SynthConfig) -> tuple[Burst, list[np.ndarray]]:
    """Reference = clean scene; alternates = randomly moved copies; noise on every frame.

    Returns the noisy burst and per-alternate ground-truth ref -> alt homographies.
    For a fixed seed, frame k (motion and noise) does not depend on ``n_frames``.
    """
    if clean.domain is not Domain.RAW_LINEAR:
        raise InvalidArgument("clean scene must be raw-linear")
    if np.any(clean.data < 0):
        raise InvalidArgument("clean scene must be non-negative")
    if cfg.n_frames > 1 and 2 * cfg.shift_max >= min(clean.shape):
        raise InvalidArgument(f"shift {cfg.shift_max} too large for {clean.width}x{clean.height} image")
    params = cfg.noise_params()
    rng = np.random.default_rng(cfg.seed)
    motions = [random_motion(rng, cfg, clean.shape) for _ in range(cfg.n_frames - 1)]
    frames = [clean] + [move(clean, m) for m in motions]
    if cfg.noise:
        # keyed on (seed, frame index) so frame k is the same draw whatever n_frames is
        seeds = [int(np.random.SeedSequence([cfg.seed, k]).generate_state(1, np.uint64)[0]) for k in range(len(frames))]
        frames = [synth_noise(f, params, s) for f, s in zip(frames, seeds)]
    return Burst(frames[0], tuple(frames[1:]), params), motions
