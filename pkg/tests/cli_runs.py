"""Runs every CLI subcommand into a directory and collects the written files."""
from pathlib import Path

from burstvst.harness.cli import main

SUBCOMMANDS = ("synth", "align", "denoise", "vst-profile", "metrics", "bench")


def run_all(root: Path, seed: int = 7) -> dict[str, dict[str, bytes]]:
    root = Path(root)
    s = str(root / "synth")
    argv = {
        "synth": ["--seed", str(seed), "--frames", "4", "--out", s, "synth", "--size", "128", "128", "--shift-max", "5"],
        "align": ["align", s, "--out", str(root / "align"), "--seed", str(seed)],
        "denoise": ["denoise", s, "--out", str(root / "denoise"), "--seed", str(seed)],
        "vst-profile": ["vst-profile", "--out", str(root / "vst-profile"), "--samples", "20000",
                        "--means", "0.1", "2", "--seed", str(seed)],
        "metrics": ["metrics", str(Path(s) / "clean.pgm"), s, "--out", str(root / "metrics")],
        "bench": ["bench", "--out", str(root / "bench"), "--size", "128", "128", "--frames", "3",
                  "--shift-max", "5", "--seed", str(seed)],
    }
    out = {}
    for name in SUBCOMMANDS:
        code = main(argv[name])
        assert code == 0, f"{name} exited with {code}"
        d = root / name
        out[name] = {p.name: p.read_bytes() for p in sorted(d.iterdir())}
    return out
