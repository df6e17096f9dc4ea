"""Structural attributes: tensor coherence, Sobel kernels, texture gradient,
and GLCM features.

Oracles: per-voxel coherence recomputed from an explicitly extracted cube;
the perceptual dissimilarity checked against the single Kronecker DFT matrix
applied to vectorized cubes.
"""

import numpy as np
import pytest

from subsurf.attributes import (GoTParams, dft_matrix, glcm_features,
                                glcm_matrix, got3d, gtc, gtc_discontinuity,
                                perceptual_dissimilarity, sobel_directional,
                                sobel_magnitude, SOBEL_KERNELS)
from subsurf.errors import GeometryError
from subsurf.multilinear import leading_eig_ratio, unfold
from subsurf.volume import SeismicVolume


def _volume(shape=(6, 7, 12), seed=0):
    rng = np.random.default_rng(seed)
    return SeismicVolume(rng.standard_normal(shape).astype(np.float32))


def gtc_voxel_oracle(volume, voxel, cube):
    """Coherence channels at one voxel from the padded cube, independently
    of the batched production path."""
    halves = [(c - 1) // 2 for c in cube]
    padded = np.pad(volume.amplitudes.astype(np.float64),
                    [(h, h) for h in halves], mode="edge")
    i, x, t = voxel
    block = padded[i:i + cube[0], x:x + cube[1], t:t + cube[2]]
    return np.array([leading_eig_ratio(unfold(block, m)) for m in (1, 2, 3)])


class TestGtc:
    def test_matches_voxel_oracle(self):
        vol = _volume()
        cube = (3, 3, 5)
        att = gtc(vol, cube)
        rng = np.random.default_rng(1)
        for _ in range(12):
            voxel = tuple(int(rng.integers(0, s)) for s in vol.shape)
            want = gtc_voxel_oracle(vol, voxel, cube)
            got = att.values[(slice(None),) + voxel]
            np.testing.assert_allclose(got, want, atol=1e-10)

    def test_range(self):
        att = gtc(_volume(seed=2), (3, 3, 5))
        assert att.values.min() >= 0.0
        assert att.values.max() <= 1.0

    def test_laterally_constant_volume_fully_coherent(self):
        trace = np.sin(np.linspace(0, 6, 16))
        vol = SeismicVolume(np.broadcast_to(trace, (5, 5, 16)).copy())
        att = gtc(vol, (3, 3, 5))
        assert np.all(att.values == 1.0)
        assert np.all(gtc_discontinuity(att) == 0.0)

    def test_constant_volume_degenerate_exact_one(self):
        vol = SeismicVolume(np.full((4, 4, 8), 3.0, dtype=np.float32))
        att = gtc(vol, (3, 3, 5))
        assert np.all(att.values == 1.0)

    def test_scale_invariance(self):
        vol = _volume(seed=3)
        scaled = SeismicVolume(vol.amplitudes * 3.7)
        a1 = gtc(vol, (3, 3, 5)).values
        a2 = gtc(scaled, (3, 3, 5)).values
        np.testing.assert_allclose(a1, a2, atol=1e-9)

    def test_inline_restriction_matches_full(self):
        vol = _volume(seed=4)
        full = gtc(vol, (3, 3, 5)).values
        part = gtc(vol, (3, 3, 5), inlines=slice(2, 4)).values
        np.testing.assert_allclose(part, full[:, 2:4], atol=0)

    def test_even_cube_rejected(self):
        with pytest.raises(GeometryError):
            gtc(_volume(), (2, 3, 5))

    def test_cube_larger_than_volume_rejected(self):
        with pytest.raises(GeometryError):
            gtc(_volume((3, 3, 4)), (3, 3, 5))

    def test_discontinuity_needs_three_channels(self):
        from subsurf.attributes import AttributeVolume
        with pytest.raises(GeometryError):
            gtc_discontinuity(AttributeVolume(np.zeros((4, 4, 4))))


class TestSobel:
    def test_diagonal_ramp_nulls_45(self):
        r, c = np.meshgrid(np.arange(8), np.arange(8), indexing="ij")
        ramp = (r + c).astype(np.float64)
        out45 = sobel_directional(ramp, 45)
        assert np.all(out45[1:-1, 1:-1] == 0.0)
        outm45 = sobel_directional(ramp, -45)
        assert np.all(outm45[1:-1, 1:-1] == 12.0)

    def test_antidiagonal_ramp_nulls_minus45(self):
        r, c = np.meshgrid(np.arange(8), np.arange(8), indexing="ij")
        ramp = (r - c).astype(np.float64)
        assert np.all(sobel_directional(ramp, -45)[1:-1, 1:-1] == 0.0)
        assert np.all(np.abs(sobel_directional(ramp, 45)[1:-1, 1:-1]) == 12.0)

    def test_horizontal_edge_responds_to_0(self):
        r = np.arange(8, dtype=np.float64)[:, None] * np.ones((1, 8))
        assert np.all(sobel_directional(r, 0)[1:-1, 1:-1] == 8.0)
        assert np.all(sobel_directional(r, 90)[1:-1, 1:-1] == 0.0)

    def test_vertical_edge_responds_to_90(self):
        c = np.ones((8, 1)) * np.arange(8, dtype=np.float64)[None, :]
        assert np.all(sobel_directional(c, 90)[1:-1, 1:-1] == 8.0)
        assert np.all(sobel_directional(c, 0)[1:-1, 1:-1] == 0.0)

    def test_kernel_coefficient_patterns(self):
        for k in SOBEL_KERNELS.values():
            assert k.sum() == 0.0
            assert sorted(np.abs(k).ravel()) == [0, 0, 0, 1, 1, 1, 1, 2, 2]

    def test_magnitude_nonnegative(self):
        img = np.random.default_rng(0).standard_normal((10, 10))
        assert np.all(sobel_magnitude(img) >= 0.0)

    def test_bad_angle(self):
        with pytest.raises(GeometryError):
            sobel_directional(np.zeros((4, 4)), 30)

    def test_too_small(self):
        with pytest.raises(GeometryError):
            sobel_directional(np.zeros((2, 5)), 0)


def kron_dissimilarity_oracle(a, b):
    """Dissimilarity via one explicit Kronecker DFT matrix on vectorized
    cubes (C-order)."""
    dims = a.shape
    k = np.kron(dft_matrix(dims[0]),
                np.kron(dft_matrix(dims[1]), dft_matrix(dims[2])))
    vec = np.abs(a - b).ravel()
    inner = k @ vec
    outer = k @ np.abs(inner)
    return float(np.mean(np.abs(outer)))


class TestPerceptualDissimilarity:
    def test_matches_kronecker_oracle(self):
        rng = np.random.default_rng(0)
        for dims in ((2, 2, 2), (3, 2, 4), (3, 3, 3)):
            a = rng.standard_normal(dims)
            b = rng.standard_normal(dims)
            got = perceptual_dissimilarity(a, b)
            want = kron_dissimilarity_oracle(a, b)
            assert got == pytest.approx(want, rel=1e-10)

    def test_identical_cubes_zero(self):
        a = np.random.default_rng(1).standard_normal((3, 3, 3))
        assert perceptual_dissimilarity(a, a.copy()) == 0.0

    def test_symmetric(self):
        rng = np.random.default_rng(2)
        a, b = rng.standard_normal((2, 3, 3, 3))
        assert perceptual_dissimilarity(a, b) == \
            perceptual_dissimilarity(b, a)

    def test_nonnegative(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            a, b = rng.standard_normal((2, 3, 3, 3))
            assert perceptual_dissimilarity(a, b) >= 0.0

    def test_shape_mismatch(self):
        with pytest.raises(GeometryError):
            perceptual_dissimilarity(np.zeros((2, 2, 2)), np.zeros((2, 2, 3)))


def got_voxel_oracle(volume, voxel, params):
    """Texture gradient at one voxel from explicitly padded cube pairs."""
    shape = volume.shape
    vol = volume.amplitudes.astype(np.float64)
    axis_index = {"t": 2, "x": 1, "y": 0}
    total = 0.0
    for axis_name in params.axes:
        a = axis_index[axis_name]
        s = 0.0
        for n, w in zip(params.scales, params.weights):
            half = (n - 1) // 2
            widths = [(half, half)] * 3
            widths[a] = (n, n)
            padded = np.pad(vol, widths, mode="edge")
            # voxel center in padded coordinates
            ctr = [voxel[d] + widths[d][0] for d in range(3)]
            lo = [slice(c - half, c + half + 1) for c in ctr]
            minus, plus = list(lo), list(lo)
            minus[a] = slice(ctr[a] - n, ctr[a])
            plus[a] = slice(ctr[a] + 1, ctr[a] + 1 + n)
            s += w * perceptual_dissimilarity(padded[tuple(minus)],
                                              padded[tuple(plus)])
        total += s ** 2
    return np.sqrt(total)


class TestGot:
    def test_matches_voxel_oracle(self):
        vol = _volume((6, 6, 8), seed=5)
        params = GoTParams(scales=(3, 5), weights=(0.5, 0.5))
        att = got3d(vol, params)
        rng = np.random.default_rng(6)
        for _ in range(8):
            voxel = tuple(int(rng.integers(0, s)) for s in vol.shape)
            want = got_voxel_oracle(vol, voxel, params)
            # bulk path runs in single precision; oracle is double
            assert att.values[0][voxel] == pytest.approx(want, rel=2e-5)

    def test_constant_volume_zero(self):
        vol = SeismicVolume(np.full((5, 5, 6), 2.0, dtype=np.float32))
        att = got3d(vol, GoTParams(scales=(3,), weights=(1.0,)))
        assert np.all(att.values == 0.0)

    def test_nonnegative(self):
        att = got3d(_volume((5, 5, 6), seed=7),
                    GoTParams(scales=(3,), weights=(1.0,)))
        assert np.all(att.values >= 0.0)

    def test_boundary_peak_on_texture_contrast(self):
        # two laterally-smooth textures meeting at column 10: per-slice max
        # GoT lands at the boundary
        t = np.arange(24)
        tex_a = np.sin(2 * np.pi * 0.2 * t)
        tex_b = np.sin(2 * np.pi * 0.45 * t + 1.0)
        grid = np.broadcast_to(tex_a, (8, 20, 24)).copy()
        grid[:, 10:, :] = tex_b
        vol = SeismicVolume(grid.astype(np.float32))
        att = got3d(vol, GoTParams(scales=(5,), weights=(1.0,), axes=("x",)))
        peak_cols = att.values[0].max(axis=2).argmax(axis=1)
        assert np.all(np.abs(peak_cols - 10) <= 2)

    def test_param_validation(self):
        with pytest.raises(GeometryError):
            GoTParams(scales=(4,), weights=(1.0,))
        with pytest.raises(GeometryError):
            GoTParams(scales=(3, 5), weights=(1.0,))
        with pytest.raises(GeometryError):
            GoTParams(scales=(5, 3), weights=(0.5, 0.5))
        with pytest.raises(GeometryError):
            GoTParams(scales=(3,), weights=(0.4,))
        with pytest.raises(GeometryError):
            GoTParams(axes=("z",))

    def test_scale_must_fit(self):
        with pytest.raises(GeometryError):
            got3d(_volume((4, 4, 4)), GoTParams(scales=(5,), weights=(1.0,)))


class TestGlcm:
    def test_checkerboard_matrix(self):
        img = np.indices((6, 6)).sum(axis=0) % 2
        p = glcm_matrix(img, 2, (0, 1))
        np.testing.assert_allclose(p, [[0.0, 0.5], [0.5, 0.0]])

    def test_checkerboard_features(self):
        img = np.indices((6, 6)).sum(axis=0) % 2
        feats = glcm_features(img, levels=2, offsets=((0, 1),))
        contrast, energy, entropy, homogeneity = feats
        assert contrast == pytest.approx(1.0)
        assert energy == pytest.approx(0.5)
        assert entropy == pytest.approx(1.0)
        assert homogeneity == pytest.approx(0.5)

    def test_constant_window_single_bin(self):
        p = glcm_matrix(np.full((4, 4), 7.0), 4, (1, 0))
        assert p[0, 0] == 1.0
        assert p.sum() == 1.0
        feats = glcm_features(np.full((4, 4), 7.0), 4, ((1, 0),))
        np.testing.assert_allclose(feats, [0.0, 1.0, 0.0, 1.0])

    def test_probabilities_sum_to_one(self):
        rng = np.random.default_rng(9)
        img = rng.standard_normal((8, 8))
        for off in ((0, 1), (1, 0), (1, 1), (1, -1)):
            assert glcm_matrix(img, 16, off).sum() == pytest.approx(1.0)

    def test_offset_too_large(self):
        with pytest.raises(GeometryError):
            glcm_matrix(np.zeros((3, 3)), 4, (3, 0))
