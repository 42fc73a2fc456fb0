import json

import numpy as np
import pytest

from burstvst.burst import Burst, Layout
from burstvst.errors import FormatError, InvalidArgument
from burstvst.harness import io
from burstvst.noise_model import NoiseParams

from conftest import raw


def meta(**kw):
    base = dict(sigma_s=0.014, sigma_r=0.036, gain=4.0)
    base.update(kw)
    return io.BurstMeta(**base)


class TestPgm:
    def test_round_trip_bit_identical(self, tmp_path, rng):
        s = rng.integers(0, 65536, (7, 11)).astype(np.uint16)
        io.write_pgm(tmp_path / "a.pgm", s)
        back, maxval = io.read_pgm(tmp_path / "a.pgm")
        assert maxval == 65535 and back.dtype == np.uint16
        assert np.array_equal(back, s)

    def test_big_endian_layout(self):
        buf = io.encode_pgm(np.array([[0x0102, 0xA0B0]], dtype=np.uint16))
        assert buf == b"P5\n2 1\n65535\n\x01\x02\xa0\xb0"

    def test_header_comments_and_8bit(self):
        buf = b"P5\n# made by hand\n3 1 # width height\n255\n\x00\x7f\xff"
        s, maxval = io.decode_pgm(buf)
        assert maxval == 255 and s.tolist() == [[0, 127, 255]]

    def test_bad_magic(self):
        with pytest.raises(FormatError, match="P6") as e:
            io.decode_pgm(b"P6\n1 1\n255\n\x00\x00\x00")
        assert e.value.offset == 0

    def test_truncated_data(self):
        with pytest.raises(FormatError) as e:
            io.decode_pgm(b"P5\n4 4\n65535\n" + b"\x00" * 10)
        assert e.value.offset == len(b"P5\n4 4\n65535\n") + 10

    def test_truncated_header(self):
        with pytest.raises(FormatError) as e:
            io.decode_pgm(b"P5\n4 ")
        assert e.value.offset is not None

    def test_bad_fields(self):
        with pytest.raises(FormatError):
            io.decode_pgm(b"P5\n4 x\n255\n" + b"\x00" * 16)
        with pytest.raises(FormatError):
            io.decode_pgm(b"P5\n1 1\n70000\n\x00\x00")

    def test_sample_above_maxval(self):
        with pytest.raises(FormatError):
            io.decode_pgm(b"P5\n1 1\n1000\n\xff\xff")

    def test_encode_checks(self):
        with pytest.raises(InvalidArgument):
            io.encode_pgm(np.array([[70000]]))


class TestMeta:
    def test_params_from_sidecar(self):
        m = io.BurstMeta.from_dict({"sigma_s": 0.014, "sigma_r": 0.036, "gain": 4, "black_level": 4096,
                                    "white_level": 65535, "layout": "gray", "bit_depth": 16})
        assert m.params == NoiseParams(0.014, 0.036)

    @pytest.mark.parametrize("key", io.SIDECAR_KEYS)
    def test_missing_key_named(self, key):
        d = {"sigma_s": 0.014, "sigma_r": 0.036, "gain": 4, "black_level": 4096,
             "white_level": 65535, "layout": "gray", "bit_depth": 16}
        del d[key]
        with pytest.raises(FormatError) as e:
            io.BurstMeta.from_dict(d)
        assert e.value.key == key

    def test_raw_conversion_exact(self, rng):
        m = meta(black_level=1024, white_level=16383, bit_depth=14)
        s = rng.integers(0, 16384, (5, 5)).astype(np.uint16)
        s[0, :3] = [0, 1023, 16383]
        plane = m.to_raw(s)
        assert plane.data.min() < 0  # below-black samples stay representable
        assert np.array_equal(m.to_samples(plane), s)

    def test_formula(self):
        m = meta(black_level=100, white_level=1100)
        np.testing.assert_allclose(m.to_raw(np.array([[100, 600, 1100, 0]])).data, [[0, 0.5, 1, -0.1]])

    def test_clipping_out_of_range(self):
        m = meta()
        assert m.to_samples(raw([[-5.0, 5.0]])).tolist() == [[0, 65535]]

    def test_invalid(self):
        with pytest.raises(InvalidArgument):
            meta(black_level=70000)
        with pytest.raises(InvalidArgument):
            meta(bit_depth=17)
        with pytest.raises(ValueError):
            meta(layout="xtrans")


class TestBurstDir:
    def test_round_trip(self, tmp_path, rng):
        m = meta()
        frames = [raw(m.to_raw(rng.integers(0, 65536, (6, 8)).astype(np.uint16)).data) for _ in range(3)]
        b = Burst(frames[0], tuple(frames[1:]), m.params)
        io.save_burst(tmp_path / "b", b, m)
        back, m2 = io.load_burst(tmp_path / "b")
        assert m2 == m and len(back) == 3 and back.layout is Layout.GRAY
        for x, y in zip(b.frames, back.frames):
            assert np.array_equal(m.to_samples(x), m.to_samples(y))
            assert np.array_equal(x.data, y.data)
        assert sorted(p.name for p in (tmp_path / "b").iterdir()) == [
            "burst.json", "frame_000.pgm", "frame_001.pgm", "frame_002.pgm"]

    def test_missing_sidecar(self, tmp_path):
        io.write_pgm(tmp_path / "frame_000.pgm", np.zeros((2, 2), np.uint16))
        with pytest.raises(FormatError) as e:
            io.load_burst(tmp_path)
        assert e.value.key == "burst.json"

    def test_bad_json(self, tmp_path):
        (tmp_path / "burst.json").write_text("{oops")
        with pytest.raises(FormatError) as e:
            io.load_meta(tmp_path)
        assert e.value.offset == 1

    def test_meta_from_sidecar_path(self, tmp_path):
        d = {"sigma_s": 0.014, "sigma_r": 0.036, "gain": 4, "black_level": 0, "white_level": 65535,
             "layout": "gray", "bit_depth": 16}
        (tmp_path / "burst.json").write_text(json.dumps(d))
        assert io.load_meta(tmp_path / "burst.json") == io.load_meta(tmp_path)

    def test_no_frames(self, tmp_path):
        (tmp_path / "burst.json").write_text(json.dumps({
            "sigma_s": 0.01, "sigma_r": 0.01, "gain": 1, "black_level": 0, "white_level": 65535,
            "layout": "gray", "bit_depth": 16}))
        with pytest.raises(FormatError):
            io.load_burst(tmp_path)
