"""Volume containers, section slicing, and the SVOL cache format."""

import os
import tempfile

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subsurf.errors import DataError, GeometryError
from subsurf.volume import (SeismicVolume, Section2D, extract_section,
                            insert_section, read_svol, read_svol_volume,
                            write_svol)


def _volume(shape=(4, 5, 6), seed=0):
    rng = np.random.default_rng(seed)
    return SeismicVolume(rng.standard_normal(shape).astype(np.float32))


class TestSeismicVolume:
    def test_shape_properties(self):
        v = _volume((4, 5, 6))
        assert (v.n_inline, v.n_crossline, v.n_samples) == (4, 5, 6)
        assert v.shape == (4, 5, 6)

    def test_rejects_non_3d(self):
        with pytest.raises(GeometryError):
            SeismicVolume(np.zeros((4, 5)))

    def test_rejects_non_finite(self):
        a = np.zeros((2, 2, 2), dtype=np.float32)
        a[0, 0, 0] = np.nan
        with pytest.raises(DataError):
            SeismicVolume(a)

    def test_rejects_bad_domain(self):
        with pytest.raises(GeometryError):
            SeismicVolume(np.zeros((2, 2, 2)), domain_kind="frequency")


class TestSections:
    def test_inline_values_and_image(self):
        v = _volume()
        s = extract_section(v, "inline", 2)
        assert np.array_equal(s.values, v.amplitudes[2])
        # image is depth-major: rows are samples
        assert s.image.shape == (v.n_samples, v.n_crossline)
        assert np.array_equal(s.image, v.amplitudes[2].T)

    def test_crossline_and_timeslice(self):
        v = _volume()
        sx = extract_section(v, "crossline", 1)
        assert np.array_equal(sx.values, v.amplitudes[:, 1, :])
        ts = extract_section(v, "timeslice", 3)
        assert np.array_equal(ts.values, v.amplitudes[:, :, 3])
        assert np.array_equal(ts.image, ts.values)

    def test_out_of_range(self):
        v = _volume()
        with pytest.raises(GeometryError):
            extract_section(v, "inline", 4)
        with pytest.raises(GeometryError):
            extract_section(v, "depth", 0)

    def test_extract_insert_round_trip(self):
        v = _volume()
        for axis, idx in (("inline", 1), ("crossline", 3), ("timeslice", 5)):
            s = extract_section(v, axis, idx)
            v2 = insert_section(v, s)
            assert np.array_equal(v2.amplitudes, v.amplitudes)

    def test_insert_modified_section(self):
        v = _volume()
        s = extract_section(v, "inline", 0)
        s.values[:] = 7.0
        v2 = insert_section(v, s)
        assert np.all(v2.amplitudes[0] == 7.0)
        assert np.array_equal(v2.amplitudes[1:], v.amplitudes[1:])

    def test_section_copy_isolated(self):
        v = _volume()
        s = extract_section(v, "inline", 0)
        s.values[0, 0] = 999.0
        assert v.amplitudes[0, 0, 0] != 999.0


class TestSvol:
    def test_round_trip_volume_bit_exact(self, tmp_path):
        v = _volume((3, 4, 5), seed=7)
        path = tmp_path / "v.svol"
        write_svol(v, path)
        back = read_svol(path)
        assert back.dtype == np.float32
        assert np.array_equal(back, v.amplitudes)
        vol = read_svol_volume(path)
        assert np.array_equal(vol.amplitudes, v.amplitudes)

    def test_2d_grid_leading_dim(self, tmp_path):
        grid = np.arange(12, dtype=np.float32).reshape(3, 4)
        path = tmp_path / "g.svol"
        write_svol(grid, path)
        back = read_svol(path)
        assert back.shape == (1, 3, 4)
        assert np.array_equal(back[0], grid)

    def test_header_layout(self, tmp_path):
        grid = np.zeros((2, 3, 4), dtype=np.float32)
        path = tmp_path / "h.svol"
        write_svol(grid, path)
        raw = path.read_bytes()
        assert raw[:4] == b"SVOL"
        assert raw[4] == 1
        assert np.array_equal(np.frombuffer(raw[5:17], dtype="<u4"), [2, 3, 4])
        assert len(raw) == 17 + 2 * 3 * 4 * 4

    def test_deterministic_bytes(self, tmp_path):
        v = _volume((3, 4, 5), seed=1)
        p1, p2 = tmp_path / "a.svol", tmp_path / "b.svol"
        write_svol(v, p1)
        write_svol(v, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.svol"
        path.write_bytes(b"NOPE" + bytes(20))
        with pytest.raises(DataError):
            read_svol(path)

    def test_truncated_payload(self, tmp_path):
        v = _volume((2, 2, 2))
        path = tmp_path / "t.svol"
        write_svol(v, path)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(DataError):
            read_svol(path)

    def test_unsupported_version(self, tmp_path):
        path = tmp_path / "v9.svol"
        path.write_bytes(b"SVOL" + bytes([9]) + bytes(12))
        with pytest.raises(DataError):
            read_svol(path)

    @settings(max_examples=25, deadline=None)
    @given(ni=st.integers(1, 4), nx=st.integers(1, 4), ns=st.integers(1, 4),
           seed=st.integers(0, 2 ** 31))
    def test_round_trip_property(self, ni, nx, ns, seed):
        rng = np.random.default_rng(seed)
        grid = rng.standard_normal((ni, nx, ns)).astype(np.float32)
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, "p.svol")
            write_svol(grid, path)
            assert np.array_equal(read_svol(path), grid)
