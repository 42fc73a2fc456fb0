"""Binary PGM frames and burst directories with a JSON sidecar."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..burst import Burst, Layout
from ..errors import FormatError, InvalidArgument
from ..noise_model import NoiseParams
from ..plane import Domain, ImagePlane

SIDECAR = "burst.json"
FRAME_FMT = "frame_{:03d}.pgm"
SIDECAR_KEYS = ("sigma_s", "sigma_r", "gain", "black_level", "white_level", "layout", "bit_depth")


# --- PGM -------------------------------------------------------------------

def _header_tokens(buf: bytes, n: int):
    """First ``n`` whitespace-separated header tokens plus the offset after them."""
    out, i = [], 0
    while len(out) < n:
        while i < len(buf) and buf[i:i + 1].isspace():
            i += 1
        if i < len(buf) and buf[i:i + 1] == b"#":
            while i < len(buf) and buf[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < len(buf) and not buf[j:j + 1].isspace() and buf[j:j + 1] != b"#":
            j += 1
        if j == i:
            raise FormatError(f"truncated PGM header at byte {i}", offset=i)
        out.append((buf[i:j], i))
        i = j
    return out, i


def decode_pgm(buf: bytes) -> tuple[np.ndarray, int]:
    """Binary (P5) PGM bytes -> (uint16 samples, maxval)."""
    magic = buf[:2]
    if magic != b"P5":
        raise FormatError(f"bad PGM magic {magic!r}, expected b'P5'", offset=0)
    toks, i = _header_tokens(buf[2:], 3)
    vals = []
    for tok, off in toks:
        try:
            vals.append(int(tok))
        except ValueError:
            raise FormatError(f"bad PGM header field {tok!r} at byte {off + 2}", offset=off + 2) from None
    w, h, maxval = vals
    if w < 1 or h < 1 or not 0 < maxval <= 65535:
        raise FormatError(f"bad PGM geometry {w}x{h} maxval {maxval}", offset=2)
    i += 2
    if i >= len(buf) or not buf[i:i + 1].isspace():
        raise FormatError(f"missing whitespace after PGM header at byte {i}", offset=i)
    i += 1
    width = 1 if maxval < 256 else 2
    need = w * h * width
    if len(buf) - i < need:
        raise FormatError(f"truncated PGM data: {len(buf) - i} of {need} bytes after byte {i}",
                          offset=len(buf))
    dt = np.dtype(">u2") if width == 2 else np.dtype("u1")
    data = np.frombuffer(buf, dtype=dt, count=w * h, offset=i).reshape(h, w)
    if data.max(initial=0) > maxval:
        raise FormatError(f"sample exceeds maxval {maxval}", offset=i)
    return data.astype(np.uint16), maxval


def encode_pgm(samples: np.ndarray, maxval: int = 65535) -> bytes:
    s = np.asarray(samples)
    if s.ndim != 2:
        raise InvalidArgument("PGM needs a 2-D array")
    if not 0 < maxval <= 65535:
        raise InvalidArgument(f"maxval must be in (0, 65535], got {maxval}")
    if s.size and (s.min() < 0 or s.max() > maxval):
        raise InvalidArgument("samples outside [0, maxval]")
    dt = ">u2" if maxval >= 256 else "u1"
    return f"P5\n{s.shape[1]} {s.shape[0]}\n{maxval}\n".encode() + s.astype(dt).tobytes()


def read_pgm(path) -> tuple[np.ndarray, int]:
    return decode_pgm(Path(path).read_bytes())


def write_pgm(path, samples: np.ndarray, maxval: int = 65535) -> None:
    Path(path).write_bytes(encode_pgm(samples, maxval))


# --- raw-linear conversion -------------------------------------------------

@dataclass(frozen=True)
class BurstMeta:
    sigma_s: float
    sigma_r: float
    gain: float = 1.0
    black_level: int = 4096
    white_level: int = 65535
    layout: str = Layout.GRAY.value
    bit_depth: int = 16

    def __post_init__(self):
        if not 1 <= self.bit_depth <= 16:
            raise InvalidArgument(f"bit_depth must be in [1, 16], got {self.bit_depth}")
        if not 0 <= self.black_level < self.white_level <= self.maxval:
            raise InvalidArgument(f"need 0 <= black < white <= {self.maxval}")
        Layout(self.layout)

    @property
    def maxval(self) -> int:
        return (1 << self.bit_depth) - 1

    @property
    def params(self) -> NoiseParams:
        return NoiseParams(self.sigma_s, self.sigma_r)

    def to_raw(self, samples: np.ndarray) -> ImagePlane:
        s = samples.astype(np.float64)
        return ImagePlane((s - self.black_level) / (self.white_level - self.black_level), Domain.RAW_LINEAR)

    def to_samples(self, plane: ImagePlane) -> np.ndarray:
        """Quantize; values beyond the representable range are clipped."""
        s = plane.data.astype(np.float64) * (self.white_level - self.black_level) + self.black_level
        return np.clip(np.rint(s), 0, self.maxval).astype(np.uint16)

    @classmethod
    def from_dict(cls, d: dict) -> "BurstMeta":
        for k in SIDECAR_KEYS:
            if k not in d:
                raise FormatError(f"sidecar missing key {k!r}", key=k)
        try:
            return cls(float(d["sigma_s"]), float(d["sigma_r"]), float(d["gain"]), int(d["black_level"]),
                       int(d["white_level"]), str(d["layout"]), int(d["bit_depth"]))
        except (TypeError, ValueError) as e:
            raise FormatError(f"bad sidecar value: {e}") from e


def load_plane(path, meta: BurstMeta) -> ImagePlane:
    samples, _ = read_pgm(path)
    return meta.to_raw(samples)


def save_plane(path, plane: ImagePlane, meta: BurstMeta) -> None:
    write_pgm(path, meta.to_samples(plane), meta.maxval)


# --- burst directories -----------------------------------------------------

def save_burst(dirpath, burst: Burst, meta: BurstMeta) -> None:
    d = Path(dirpath)
    d.mkdir(parents=True, exist_ok=True)
    for n, f in enumerate(burst.frames):
        save_plane(d / FRAME_FMT.format(n), f, meta)
    (d / SIDECAR).write_text(json.dumps(asdict(meta), indent=2, sort_keys=True) + "\n")


def load_meta(dirpath) -> BurstMeta:
    """Read the sidecar of a burst directory; a path to the sidecar file itself also works."""
    p = Path(dirpath)
    if not p.is_file():
        p = p / SIDECAR
    if not p.exists():
        raise FormatError(f"no sidecar {SIDECAR} in {dirpath}", key=SIDECAR)
    try:
        d = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise FormatError(f"sidecar is not valid JSON: {e.msg}", offset=e.pos) from e
    if not isinstance(d, dict):
        raise FormatError("sidecar must be a JSON object", offset=0)
    return BurstMeta.from_dict(d)


def frame_paths(dirpath) -> list[Path]:
    d = Path(dirpath)
    paths = sorted(p for p in d.iterdir() if p.name.startswith("frame_") and p.suffix == ".pgm")
    if not paths:
        raise FormatError(f"no frame_*.pgm files in {dirpath}", key="frame_000.pgm")
    return paths


def load_burst(dirpath) -> tuple[Burst, BurstMeta]:
    meta = load_meta(dirpath)
    frames = [load_plane(p, meta) for p in frame_paths(dirpath)]
    return Burst(frames[0], tuple(frames[1:]), meta.params, Layout(meta.layout)), meta

