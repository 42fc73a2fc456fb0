"""Command-line entry point.

Every subcommand writes its results under ``--out``.  Output files depend only
on inputs, seed and config; wall-clock timings go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .. import vst
from ..align import align_burst, format_diagnostics
from ..align.tiles import warp_tiles
from ..burst import Burst, Layout, pack_rggb, unpack_rggb
from ..errors import FormatError, InvalidArgument, StageError
from ..metrics import report
from ..noise_model import PRESETS, preset_params
from ..plane import ImagePlane
from . import io
from .pipeline import PipelineConfig, run_pipeline
from .synth import Motion, SynthConfig, motion_magnitude, synth_burst, textured_scene

METRIC_HEADER = ["frame_id", "psnr_db", "ssim", "l1", "grad_l1", "combined"]


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    return str(v)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def _metric_row(frame_id, rep):
    return [frame_id, rep.psnr_db, rep.ssim, rep.l1, rep.grad_l1, rep.combined_loss]


def _load_config(args) -> PipelineConfig:
    if not args.config:
        return PipelineConfig()
    try:
        d = json.loads(Path(args.config).read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"config is not valid JSON: {e.msg}", offset=e.pos) from e
    if not isinstance(d, dict):
        raise FormatError("config must be a JSON object", offset=0)
    return PipelineConfig.from_dict(d)


def _out(args) -> Path:
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _timing(name, seconds):
    print(f"{name}: {seconds:.3f} s", file=sys.stderr)


def _synth_cfg(args, n_frames=None) -> SynthConfig:
    rot = getattr(args, "rotation_deg", 0.0)
    return SynthConfig(
        n_frames=args.frames if n_frames is None else n_frames,
        shift_min=getattr(args, "shift_min", 2.0), shift_max=getattr(args, "shift_max", 16.0),
        motion=Motion.TRANSLATION_ROTATION if rot > 0 else Motion.TRANSLATION, max_rotation_deg=rot,
        gain=args.gain, preset=args.preset, noise=not getattr(args, "no_noise", False), seed=args.seed)


# --- subcommands -----------------------------------------------------------

def cmd_synth(args) -> None:
    out = _out(args)
    clean = textured_scene(tuple(args.size), seed=args.seed)
    cfg = _synth_cfg(args)
    burst, motions = synth_burst(clean, cfg)
    p = burst.params
    meta = io.BurstMeta(p.sigma_s, p.sigma_r, args.gain)
    io.save_burst(out, burst, meta)
    io.save_plane(out / "clean.pgm", clean, meta)
    rows = [[n, *m.ravel(), motion_magnitude(m)] for n, m in enumerate(motions, start=1)]
    _write_csv(out / "motions.csv", ["frame_id", *[f"h{i}{j}" for i in range(3) for j in range(3)], "magnitude"], rows)


def _warp_raw(burst: Burst, diag) -> Burst:
    """Apply level-0 tile flows found in the stabilized domain to the raw frames."""
    alts = []
    for alt, fd in zip(burst.alternates, diag.frames):
        flow = fd.flows[0]
        if burst.layout is Layout.BAYER_RGGB:
            planes = np.stack([warp_tiles(alt.with_data(c), flow).data for c in pack_rggb(alt.data)])
            alts.append(alt.with_data(unpack_rggb(planes)))
        else:
            alts.append(warp_tiles(alt, flow))
    return replace(burst, alternates=tuple(alts))


def cmd_align(args) -> None:
    burst, meta = io.load_burst(args.burst)
    cfg = _load_config(args)
    out = _out(args)
    t0 = time.perf_counter()
    stab = burst.map_frames(lambda f: vst.forward(cfg.vst_kind, f, burst.params, cfg.gauss_mean))
    _, diag = align_burst(stab, replace(cfg.align, seed=args.seed))
    _timing("align", time.perf_counter() - t0)
    io.save_burst(out, _warp_raw(burst, diag), meta)
    (out / "diagnostics.txt").write_text(format_diagnostics(diag))
    rows = []
    for n, fd in enumerate(diag.frames, start=1):
        f = fd.flows[0].flow
        for r in range(f.shape[0]):
            for c in range(f.shape[1]):
                rows.append([n, r, c, int(f[r, c, 0]), int(f[r, c, 1])])
    _write_csv(out / "flows.csv", ["frame_id", "tile_row", "tile_col", "dx", "dy"], rows)
    _write_csv(out / "global.csv", ["frame_id", "fallback", "inliers", *[f"h{i}{j}" for i in range(3) for j in range(3)]],
               [[n, fd.global_fallback, fd.global_inliers, *fd.global_h.ravel()] for n, fd in enumerate(diag.frames, start=1)])


def cmd_denoise(args) -> None:
    burst, meta = io.load_burst(args.burst)
    cfg = _load_config(args)
    cfg = replace(cfg, align=replace(cfg.align, seed=args.seed))
    clean_path = Path(args.burst) / "clean.pgm"
    gt = io.load_plane(clean_path, meta) if clean_path.exists() else None
    out = _out(args)
    res = run_pipeline(burst, cfg, gt)
    for k, v in res.timings.items():
        _timing(k, v)
    io.save_plane(out / "denoised.pgm", res.denoised, meta)
    if gt is not None:
        _write_csv(out / "metrics.csv", METRIC_HEADER, [_metric_row("noisy", res.noisy_report), _metric_row("denoised", res.report)])
    _write_csv(out / "fallbacks.csv", ["frame_id", "global_fallback"], [[n, f] for n, f in enumerate(res.fallbacks, start=1)])


def cmd_vst_profile(args) -> None:
    out = _out(args)
    t0 = time.perf_counter()
    rows = []
    for s2 in args.acute_sigma_sq:
        vp = vst.VstParams(1.0, float(s2))
        for kind in args.kinds:
            for m, v in vst.stabilization_profile(kind, vp, args.means, args.samples, args.seed):
                rows.append([kind, float(s2), m, v])
    _timing("vst-profile", time.perf_counter() - t0)
    _write_csv(out / "profile.csv", ["kind", "acute_sigma_sq", "mean", "variance"], rows)


def _planes_from(path: Path, meta):
    if path.is_dir():
        b, m = io.load_burst(path)
        return [(f"{path.name}/{io.FRAME_FMT.format(n)}", f) for n, f in enumerate(b.frames)]
    return [(path.name, io.load_plane(path, meta))]


def cmd_metrics(args) -> None:
    ref_path = Path(args.reference)
    meta = io.load_meta(args.meta if args.meta else ref_path.parent)
    ref = io.load_plane(ref_path, meta)
    cfg = _load_config(args)
    rows = []
    for c in args.candidates:
        for name, plane in _planes_from(Path(c), meta):
            rows.append(_metric_row(name, report(plane, ref, cfg.peak, cfg.gamma)))
    _write_csv(_out(args) / "metrics.csv", METRIC_HEADER, rows)


def cmd_bench(args) -> None:
    """Synthetic scenes through the full pipeline, single-frame and full burst."""
    cfg = _load_config(args)
    cfg = replace(cfg, align=replace(cfg.align, seed=args.seed))
    rows = []
    for trial in range(args.trials):
        seed = args.seed + trial
        clean = textured_scene(tuple(args.size), seed=seed)
        for n in sorted({1, args.frames}):
            burst, _ = synth_burst(clean, replace(_synth_cfg(args, n), seed=seed))
            res = run_pipeline(burst, cfg, clean)
            _timing(f"trial {trial} frames {n}", sum(res.timings.values()))
            r, z = res.report, res.noisy_report
            rows.append([trial, seed, n, z.psnr_db, r.psnr_db, r.psnr_db - z.psnr_db, r.ssim, r.combined_loss, sum(res.fallbacks)])
    _write_csv(_out(args) / "bench.csv",
               ["trial", "seed", "n_frames", "noisy_psnr_db", "psnr_db", "gain_db", "ssim", "combined", "fallbacks"], rows)


# --- parser ----------------------------------------------------------------

def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--config", default=d(None), help="pipeline config JSON")
    p.add_argument("--preset", choices=sorted(PRESETS), default=d("kpn"))
    p.add_argument("--gain", type=float, default=d(4.0))
    p.add_argument("--frames", type=int, default=d(8))
    p.add_argument("--out", default=d("out"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="burstvst", description="Stabilized burst alignment and fusion.")
    _global_flags(ap, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic noisy burst")
    p.add_argument("--size", type=int, nargs=2, default=[512, 512], metavar=("H", "W"))
    p.add_argument("--shift-min", type=float, default=2.0)
    p.add_argument("--shift-max", type=float, default=16.0)
    p.add_argument("--rotation-deg", type=float, default=0.0)
    p.add_argument("--no-noise", action="store_true")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("align", parents=[common], help="align a burst directory")
    p.add_argument("burst")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("denoise", parents=[common], help="run the full pipeline on a burst directory")
    p.add_argument("burst")
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("vst-profile", parents=[common], help="Monte-Carlo variance profile of the transforms")
    p.add_argument("--kinds", nargs="+", default=["freeman_tukey", "gat"], choices=list(vst.PROFILE_KINDS))
    p.add_argument("--acute-sigma-sq", type=float, nargs="+", default=[0.0, 0.25, 1.0])
    p.add_argument("--means", type=float, nargs="+", default=[0.1, 0.5, 1, 2, 4, 8, 16, 32])
    p.add_argument("--samples", type=int, default=1_000_000)
    p.set_defaults(func=cmd_vst_profile)

    p = sub.add_parser("metrics", parents=[common], help="score PGM frames against a reference")
    p.add_argument("reference")
    p.add_argument("candidates", nargs="+", help="PGM files or burst directories")
    p.add_argument("--meta", help="directory holding the sidecar (default: the reference's directory)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bench", parents=[common], help="synthetic end-to-end benchmark")
    p.add_argument("--size", type=int, nargs=2, default=[512, 512], metavar=("H", "W"))
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--shift-min", type=float, default=2.0)
    p.add_argument("--shift-max", type=float, default=16.0)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (InvalidArgument, FormatError, StageError) as e:
        print(f"burstvst {args.command}: error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
