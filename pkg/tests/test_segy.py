"""SEG-Y reader/writer and the IBM hexadecimal float conversion.

The IBM oracle decodes sign / exponent / fraction fields digit by digit,
independently of the vectorized production path.
"""

import struct

import numpy as np
import pytest

from subsurf.errors import DataError, SegyFormatError
from subsurf.segy import (FORMAT_IBM, FORMAT_IEEE, ibm32_to_float, load_segy,
                          write_segy)
from subsurf.volume import SeismicVolume


def ibm_oracle(bits: int) -> float:
    """Scalar IBM System/360 float decoder built from first principles."""
    sign = -1.0 if (bits >> 31) & 1 else 1.0
    exponent = (bits >> 24) & 0x7F
    mantissa = 0.0
    for k in range(24):
        if (bits >> (23 - k)) & 1:
            mantissa += 2.0 ** (-(k + 1))
    return sign * mantissa * 16.0 ** (exponent - 64)


def make_segy(path, grid, fmt=FORMAT_IEEE, interval=4000, il_byte=189,
              xl_byte=193, il_of=None, xl_of=None, ns_hdr=None):
    """Hand-rolled SEG-Y writer independent of the production code."""
    ni, nx, ns = grid.shape
    with open(path, "wb") as f:
        f.write(b" " * 3200)
        bin_hdr = bytearray(400)
        struct.pack_into(">H", bin_hdr, 16, interval)
        struct.pack_into(">H", bin_hdr, 20, ns if ns_hdr is None else ns_hdr)
        struct.pack_into(">H", bin_hdr, 24, fmt)
        f.write(bin_hdr)
        for i in range(ni):
            for j in range(nx):
                hdr = bytearray(240)
                struct.pack_into(">H", hdr, 114, ns)
                il = (i + 1) if il_of is None else il_of(i, j)
                xl = (j + 1) if xl_of is None else xl_of(i, j)
                struct.pack_into(">i", hdr, il_byte - 1, il)
                struct.pack_into(">i", hdr, xl_byte - 1, xl)
                f.write(hdr)
                if fmt == FORMAT_IEEE:
                    f.write(grid[i, j].astype(">f4").tobytes())
                else:
                    f.write(np.asarray(grid[i, j], dtype=">u4").tobytes())


def float_to_ibm_bits(x: float) -> int:
    """Encode a float as IBM bits (for representable values)."""
    if x == 0:
        return 0
    sign = 1 if x < 0 else 0
    x = abs(x)
    exponent = 64
    while x >= 1.0:
        x /= 16.0
        exponent += 1
    while x < 1.0 / 16.0:
        x *= 16.0
        exponent -= 1
    fraction = int(round(x * (1 << 24)))
    if fraction == (1 << 24):
        fraction >>= 4
        exponent += 1
    return (sign << 31) | (exponent << 24) | fraction


class TestIbmConversion:
    def test_known_value(self):
        # canonical textbook pattern: 0xC276A000 = -118.625
        assert ibm32_to_float(np.array([0xC276A000]))[0] == -118.625

    def test_one(self):
        assert ibm32_to_float(np.array([0x41100000]))[0] == 1.0

    def test_zero(self):
        assert ibm32_to_float(np.array([0x00000000]))[0] == 0.0

    def test_matches_oracle_on_random_patterns(self):
        rng = np.random.default_rng(11)
        bits = rng.integers(0, 2 ** 32, size=10_000, dtype=np.uint64)
        # keep exponents representable in float32 (|value| < 16^63)
        bits = (bits & ~np.uint64(0x7F000000)) | \
            (rng.integers(40, 90, size=10_000, dtype=np.uint64) << np.uint64(24))
        got = ibm32_to_float(bits)
        want = np.array([ibm_oracle(int(b)) for b in bits])
        np.testing.assert_allclose(got, want, rtol=0, atol=0)

    def test_overflow_raises(self):
        # exponent 127 (16^63) with a full fraction overflows float32
        with pytest.raises(DataError):
            ibm32_to_float(np.array([0x7FFFFFFF]))

    def test_round_trip_of_representable_values(self):
        rng = np.random.default_rng(5)
        vals = rng.uniform(-1e3, 1e3, size=200)
        bits = np.array([float_to_ibm_bits(v) for v in vals], dtype=np.uint64)
        got = ibm32_to_float(bits)
        np.testing.assert_allclose(got, vals, rtol=1e-6)


class TestLoadSegy:
    def test_ieee_load(self, tmp_path):
        rng = np.random.default_rng(0)
        grid = rng.standard_normal((3, 4, 5)).astype(np.float32)
        path = tmp_path / "a.sgy"
        make_segy(path, grid)
        vol = load_segy(path)
        assert vol.shape == (3, 4, 5)
        assert np.array_equal(vol.amplitudes, grid)
        assert vol.sample_interval == 4000.0

    def test_ibm_load_matches_oracle(self, tmp_path):
        rng = np.random.default_rng(1)
        vals = rng.uniform(-100, 100, size=(2, 3, 4))
        bits = np.vectorize(float_to_ibm_bits, otypes=[np.uint64])(vals)
        path = tmp_path / "ibm.sgy"
        make_segy(path, bits, fmt=FORMAT_IBM)
        vol = load_segy(path)
        want = np.vectorize(lambda b: ibm_oracle(int(b)))(bits)
        np.testing.assert_allclose(vol.amplitudes, want.astype(np.float32),
                                   rtol=0, atol=0)

    def test_custom_header_bytes(self, tmp_path):
        grid = np.ones((2, 2, 3), dtype=np.float32)
        path = tmp_path / "c.sgy"
        make_segy(path, grid, il_byte=9, xl_byte=21)
        vol = load_segy(path, il_byte=9, xl_byte=21)
        assert vol.shape == (2, 2, 3)

    def test_unsorted_traces_reassembled(self, tmp_path):
        # traces written crossline-major still land on the right grid cells
        grid = np.arange(24, dtype=np.float32).reshape(2, 3, 4)
        path = tmp_path / "u.sgy"
        swapped = grid.transpose(1, 0, 2)
        make_segy(path, swapped, il_of=lambda i, j: j + 1,
                  xl_of=lambda i, j: i + 1)
        vol = load_segy(path)
        assert np.array_equal(vol.amplitudes, grid)

    def test_truncated_file(self, tmp_path):
        path = tmp_path / "t.sgy"
        path.write_bytes(b" " * 100)
        with pytest.raises(SegyFormatError):
            load_segy(path)

    def test_ragged_trace_data(self, tmp_path):
        grid = np.ones((2, 2, 3), dtype=np.float32)
        path = tmp_path / "r.sgy"
        make_segy(path, grid)
        path.write_bytes(path.read_bytes()[:-5])
        with pytest.raises(SegyFormatError):
            load_segy(path)

    def test_unsupported_format_code(self, tmp_path):
        grid = np.ones((1, 1, 2), dtype=np.float32)
        path = tmp_path / "f.sgy"
        make_segy(path, grid, fmt=3)
        with pytest.raises(SegyFormatError):
            load_segy(path)

    def test_inconsistent_trace_ns(self, tmp_path):
        grid = np.ones((1, 2, 3), dtype=np.float32)
        path = tmp_path / "n.sgy"
        make_segy(path, grid, ns_hdr=4)
        with pytest.raises(SegyFormatError):
            load_segy(path)

    def test_non_rectilinear_grid(self, tmp_path):
        # second inline uses a different crossline set: 2x3 grid, 4 traces
        grid = np.ones((2, 2, 2), dtype=np.float32)
        path = tmp_path / "g.sgy"
        make_segy(path, grid, xl_of=lambda i, j: (j + 1) if i == 0
                  else (1, 3)[j])
        with pytest.raises(SegyFormatError):
            load_segy(path)

    def test_duplicate_trace(self, tmp_path):
        grid = np.ones((2, 2, 2), dtype=np.float32)
        path = tmp_path / "d.sgy"
        make_segy(path, grid, xl_of=lambda i, j: 1)
        with pytest.raises(SegyFormatError):
            load_segy(path)


class TestWriteSegy:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        vol = SeismicVolume(rng.standard_normal((4, 3, 6)).astype(np.float32),
                            sample_interval=2000.0)
        path = tmp_path / "w.sgy"
        write_segy(vol, path)
        back = load_segy(path)
        assert np.array_equal(back.amplitudes, vol.amplitudes)
        assert back.sample_interval == 2000.0

    def test_written_format_is_ieee(self, tmp_path):
        vol = SeismicVolume(np.ones((1, 1, 2), dtype=np.float32))
        path = tmp_path / "fmt.sgy"
        write_segy(vol, path)
        raw = path.read_bytes()
        fmt, = struct.unpack(">H", raw[3224:3226])
        assert fmt == FORMAT_IEEE

    def test_deterministic_bytes(self, tmp_path):
        rng = np.random.default_rng(4)
        vol = SeismicVolume(rng.standard_normal((2, 2, 3)).astype(np.float32))
        p1, p2 = tmp_path / "x.sgy", tmp_path / "y.sgy"
        write_segy(vol, p1)
        write_segy(vol, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_too_many_samples_rejected(self, tmp_path):
        vol = SeismicVolume(np.zeros((1, 1, 70000), dtype=np.float32))
        with pytest.raises(SegyFormatError):
            write_segy(vol, tmp_path / "big.sgy")
