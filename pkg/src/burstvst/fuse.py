"""Sequential multi-frequency fusion of an aligned burst.

Each stage decomposes its inputs into three scales, denoises coarse to fine
with pluggable residual predictors, and recombines the scales so that noise
left at low frequencies in the finest output is subtracted out:

    n1 = down(o0) - o1,   n2 = down(o1) - o2
    I  = o0 - up(n1) - up(up(n2))
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .burst import Burst
from .errors import ContractViolation, InvalidArgument
from .plane import Domain, ImagePlane, expect_domain, same_shape
from .resample import down2, half_shape, up2

# (inputs at one scale, upsampled coarser result or None) -> residual at that scale
ScaleDenoiser = Callable[[Sequence[ImagePlane], Optional[ImagePlane]], ImagePlane]

N_SCALES = 3


@dataclass(frozen=True)
class FreqStack:
    m: tuple[tuple[ImagePlane, ...], ...]  # m[i] = every input at scale i
    o: tuple[ImagePlane, ...] | None = None


def freq_decompose(inputs: Sequence[ImagePlane]) -> FreqStack:
    if not inputs:
        raise InvalidArgument("need at least one input plane")
    shape = same_shape(inputs)
    if min(shape) < 4:
        raise InvalidArgument(f"planes must be at least 4x4, got {shape}")
    scales = [tuple(inputs)]
    for _ in range(N_SCALES - 1):
        scales.append(tuple(p.with_data(down2(p.data)) for p in scales[-1]))
    return FreqStack(tuple(scales))


def _residual(denoiser, inputs, lower, shape) -> np.ndarray:
    r = denoiser(inputs, lower)
    data = r.data if isinstance(r, ImagePlane) else np.asarray(r)
    if data.shape != shape:
        raise ContractViolation(f"denoiser returned residual of shape {data.shape}, expected {shape}")
    return data


def freq_denoise(stack: FreqStack, denoisers: Sequence[ScaleDenoiser]) -> FreqStack:
    """``denoisers[i]`` runs at scale ``i`` (0 = finest); scales are processed 2, 1, 0."""
    if len(denoisers) != N_SCALES:
        raise InvalidArgument(f"need {N_SCALES} scale denoisers, got {len(denoisers)}")
    outs: list[ImagePlane | None] = [None] * N_SCALES
    for i in reversed(range(N_SCALES)):
        m = stack.m[i]
        first = m[0]
        lower = None
        if i + 1 < N_SCALES:
            lower = first.with_data(up2(outs[i + 1].data, first.shape))
        r = _residual(denoisers[i], m, lower, first.shape)
        outs[i] = first.with_data(first.data.astype(np.float64) + r)
    return FreqStack(stack.m, tuple(outs))


def freq_aggregate(o0: ImagePlane, o1: ImagePlane, o2: ImagePlane) -> ImagePlane:
    if o1.shape != half_shape(o0.shape) or o2.shape != half_shape(o1.shape):
        raise InvalidArgument(f"scale shapes {o0.shape}, {o1.shape}, {o2.shape} do not form a factor-2 stack")
    a0, a1, a2 = (np.asarray(o.data, dtype=np.float64) for o in (o0, o1, o2))
    n1 = down2(a0) - a1
    n2 = down2(a1) - a2
    out = a0 - up2(n1, a0.shape) - up2(up2(n2, a1.shape), a0.shape)
    return o0.with_data(out)


def denoise_stage(inputs: Sequence[ImagePlane], bundle: Sequence[ScaleDenoiser]) -> ImagePlane:
    stack = freq_denoise(freq_decompose(inputs), bundle)
    return freq_aggregate(*stack.o)


@dataclass(frozen=True)
class FusePlan:
    """``stage_denoisers[0]`` denoises the reference alone; stage i>0 adds the i-th group of alternates."""

    group_size: int
    stage_denoisers: tuple

    def __post_init__(self):
        if self.group_size < 1:
            raise InvalidArgument("group_size must be >= 1")
        object.__setattr__(self, "stage_denoisers", tuple(self.stage_denoisers))


def stage_count(n_frames: int, group_size: int) -> int:
    return 1 + math.ceil((n_frames - 1) / group_size)


def group_alternates(alternates: Sequence, group_size: int) -> list[list]:
    """Consecutive groups in temporal order; the last one may be short."""
    alts = list(alternates)
    return [alts[i:i + group_size] for i in range(0, len(alts), group_size)]


def denoise_burst(burst: Burst, plan: FusePlan) -> ImagePlane:
    """Denoise the reference alone, then refine with each alternate group in turn."""
    if burst is None or burst.reference is None:
        raise InvalidArgument("empty burst")
    for f in burst.frames:
        expect_domain(f, Domain.VST)
    groups = group_alternates(burst.alternates, plan.group_size)
    need = 1 + len(groups)
    if len(plan.stage_denoisers) < need:
        raise InvalidArgument(f"plan has {len(plan.stage_denoisers)} stages, burst needs {need}")
    current = denoise_stage([burst.reference], plan.stage_denoisers[0])
    for i, group in enumerate(groups, start=1):
        current = denoise_stage([current] + group, plan.stage_denoisers[i])
    return current
