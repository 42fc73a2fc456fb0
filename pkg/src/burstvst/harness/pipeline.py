"""End-to-end run: stabilize, align, fuse, invert, score."""
from __future__ import annotations

import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .. import vst
from ..align import AlignConfig, AlignDiagnostics, align_burst
from ..burst import Burst, Layout, pack_rggb, unpack_rggb
from ..denoisers import DenoiserConfig, make_bundle
from ..errors import InvalidArgument, StageError
from ..fuse import FusePlan, denoise_burst, stage_count
from ..metrics import DEFAULT_GAMMA, MetricReport, psnr, report
from ..plane import Domain, ImagePlane


@dataclass(frozen=True)
class PipelineConfig:
    vst_kind: vst.VstKind = vst.VstKind.FREEMAN_TUKEY
    gauss_mean: float = 0.0
    align: AlignConfig = AlignConfig()
    align_enabled: bool = True
    group_size: int = 3
    # one entry reused for every stage, or one entry per stage
    denoisers: tuple[DenoiserConfig, ...] = (DenoiserConfig(),)
    gamma: float = DEFAULT_GAMMA
    peak: float = 1.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "vst_kind", vst.VstKind(self.vst_kind))
        except ValueError:
            raise InvalidArgument(f"unknown vst_kind {self.vst_kind!r}") from None
        object.__setattr__(self, "denoisers", tuple(self.denoisers))
        if not self.denoisers:
            raise InvalidArgument("at least one denoiser config is required")
        if self.group_size < 1:
            raise InvalidArgument("group_size must be >= 1")

    def plan(self, n_frames: int) -> FusePlan:
        n = stage_count(n_frames, self.group_size)
        if len(self.denoisers) not in (1, n):
            raise InvalidArgument(f"config lists {len(self.denoisers)} stage denoisers; burst needs 1 or {n}")
        cfgs = self.denoisers * n if len(self.denoisers) == 1 else self.denoisers
        return FusePlan(self.group_size, tuple(make_bundle(c) for c in cfgs))

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        bad = set(d) - known
        if bad:
            raise InvalidArgument(f"unknown pipeline config keys {sorted(bad)}")
        if "align" in d:
            a = dict(d["align"])
            bad = set(a) - {f.name for f in fields(AlignConfig)}
            if bad:
                raise InvalidArgument(f"unknown align config keys {sorted(bad)}")
            d["align"] = AlignConfig(**a)
        if "denoisers" in d:
            dn = d["denoisers"]
            dn = [dn] if isinstance(dn, dict) else dn
            d["denoisers"] = tuple(DenoiserConfig.from_dict(x) for x in dn)
        return cls(**d)

    def to_dict(self) -> dict:
        return {
            "vst_kind": self.vst_kind.value,
            "gauss_mean": self.gauss_mean,
            "align": {f.name: getattr(self.align, f.name) for f in fields(AlignConfig)},
            "align_enabled": self.align_enabled,
            "group_size": self.group_size,
            "denoisers": [c.to_dict() for c in self.denoisers],
            "gamma": self.gamma,
            "peak": self.peak,
        }


@dataclass
class PipelineResult:
    denoised: ImagePlane
    report: MetricReport | None
    noisy_report: MetricReport | None
    alignment: AlignDiagnostics | None
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def fallbacks(self) -> list[bool]:
        if self.alignment is None:
            return []
        return [fd.global_fallback for fd in self.alignment.frames]


class _Stage:
    def __init__(self, name, timings):
        self.name, self.timings = name, timings

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.timings[self.name] = time.perf_counter() - self.t0
        if exc is not None and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


def _fuse(burst: Burst, plan: FusePlan) -> ImagePlane:
    if burst.layout is Layout.GRAY:
        return denoise_burst(burst, plan)
    packed = [pack_rggb(f.data) for f in burst.frames]
    out = []
    for c in range(4):
        sub = Burst(ImagePlane(packed[0][c], Domain.VST),
                    tuple(ImagePlane(p[c], Domain.VST) for p in packed[1:]), burst.params)
        out.append(denoise_burst(sub, plan).data)
    return ImagePlane(unpack_rggb(np.stack(out)), Domain.VST)


def run_pipeline(burst: Burst, cfg: PipelineConfig = PipelineConfig(),
                 ground_truth: ImagePlane | None = None) -> PipelineResult:
    if burst.params is None:
        raise InvalidArgument("burst carries no noise parameters")
    for f in burst.frames:
        if f.domain is not Domain.RAW_LINEAR:
            raise InvalidArgument("pipeline input must be raw-linear")
    plan = cfg.plan(len(burst))
    timings: dict[str, float] = {}
    p = burst.params
    with _Stage("stabilize", timings):
        stab = burst.map_frames(lambda f: vst.forward(cfg.vst_kind, f, p, cfg.gauss_mean))
    diag = None
    with _Stage("align", timings):
        if cfg.align_enabled and len(stab) > 1:
            stab, diag = align_burst(stab, cfg.align)
    with _Stage("fuse", timings):
        fused = _fuse(stab, plan)
    with _Stage("invert", timings):
        out = vst.inverse(cfg.vst_kind, fused, p, cfg.gauss_mean)
    rep = noisy = None
    if ground_truth is not None:
        with _Stage("score", timings):
            rep = report(out, ground_truth, cfg.peak, cfg.gamma)
            noisy = report(burst.reference, ground_truth, cfg.peak, cfg.gamma)
    return PipelineResult(out, rep, noisy, diag, timings)
