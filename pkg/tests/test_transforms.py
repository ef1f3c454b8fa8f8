import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rieszkit.corpus import corpus, radial_bump
from rieszkit.grid import GridField, TGrid, lp_norm
from rieszkit.transforms import (
    GridResolutionError,
    maximal_apply,
    mt_apply_conv,
    mt_apply_fourier,
    outside_fraction,
    riesz_fft,
    riesz_symbol,
    riesz_truncated_direct,
)


def rel_l2(a, b):
    return lp_norm(a.with_values(a.values - b.values), 2) / lp_norm(b, 2)


def bump2(n=256, box=20.0, center=(0.7, -0.3), radius=3.0):
    return radial_bump(2, n, box, np.array(center), radius)


def mean_zero(rng, d, n, box):
    v = rng.normal(size=(n,) * d)
    return GridField(v - v.mean(), box)


class TestRieszFFT:
    def test_hilbert_cos_to_sin(self):
        n, box = 256, 20.0
        x = (np.arange(n) - n // 2) * box / n
        out = riesz_fft(GridField(np.cos(2 * math.pi * x / box), box), 1)
        assert np.max(np.abs(out.values - np.sin(2 * math.pi * x / box))) < 1e-8

    @given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2, 3]))
    @settings(max_examples=20)
    def test_plancherel(self, seed, d):
        f = mean_zero(np.random.default_rng(seed), d, 16, 4.0)
        for j in range(1, d + 1):
            assert lp_norm(riesz_fft(f, j), 2) <= lp_norm(f, 2) * (1 + 1e-12)

    def test_hilbert_isometry_off_nyquist(self):
        # the Nyquist mode is zeroed, so isometry holds on fields without it
        n, box = 64, 8.0
        x = (np.arange(n) - n // 2) * box / n
        f = GridField(sum(np.cos(2 * math.pi * k * x / box + k) for k in range(1, 20)), box)
        assert lp_norm(riesz_fft(f, 1), 2) == pytest.approx(lp_norm(f, 2), rel=1e-12)

    def test_sum_of_squares_d2(self):
        rng = np.random.default_rng(11)
        n = 32
        spec = np.fft.fftn(rng.normal(size=(n, n)))
        spec[0, :] = spec[:, 0] = 0.0
        spec[n // 2, :] = spec[:, n // 2] = 0.0
        f = GridField(np.fft.fftshift(np.fft.ifftn(spec).real), 5.0)
        total = sum(lp_norm(riesz_fft(f, j), 2) ** 2 for j in (1, 2))
        assert total == pytest.approx(lp_norm(f, 2) ** 2, rel=1e-10)

    def test_symbol_zero_at_origin(self):
        assert riesz_symbol(16, 1.0, 2, 1)[0, 0] == 0

    @pytest.mark.parametrize("j", [0, 3, 1.0])
    def test_axis_errors(self, j):
        with pytest.raises(ValueError):
            riesz_fft(bump2(32, 10.0), j)


class TestTruncatedDirect:
    def test_constant_to_zero(self):
        out = riesz_truncated_direct(GridField(np.full((64, 64), 3.0), 20.0), 1, 1.0)
        assert np.max(np.abs(out.values)) < 1e-12

    def test_dual_route(self):
        f = bump2()
        for j in (1, 2):
            lhs = riesz_truncated_direct(f, j, 0.5)
            rhs = mt_apply_fourier(riesz_fft(f, j), 0.5)
            assert rel_l2(lhs, rhs) <= 3e-3

    def test_antisymmetry(self):
        f = bump2(128, 20.0)
        flipped = f.with_values(f.values[::-1, ::-1])
        a = riesz_truncated_direct(f, 2, 1.0).values
        b = riesz_truncated_direct(flipped, 2, 1.0).values
        # x -> -x on the grid is k -> -k mod n, i.e. a reversal after a roll by one
        ref = -np.roll(a[::-1, ::-1], 1, axis=(0, 1))
        assert np.max(np.abs(np.roll(b, 1, axis=(0, 1)) - ref)) < 1e-12 * np.max(np.abs(a))

    def test_factorization_refines(self):
        errs = []
        for n in (128, 256):
            f = bump2(n)
            errs.append(rel_l2(riesz_truncated_direct(f, 1, 1.0), mt_apply_fourier(riesz_fft(f, 1), 1.0)))
        assert errs[0] / errs[1] >= 1.5

    def test_limit_recovery(self):
        f = bump2(256, 20.0, radius=4.0)
        rf = riesz_fft(f, 1)
        h = f.spacing
        gaps = [rel_l2(riesz_truncated_direct(f, 1, t), rf) for t in (16 * h, 8 * h, 4 * h, 2 * h)]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
        assert gaps[0] / gaps[-1] > 4.0

    def test_d1_and_d3_routes(self):
        f1 = radial_bump(1, 256, 20.0, np.array([0.3]), 3.0)
        assert rel_l2(riesz_truncated_direct(f1, 1, 0.5), mt_apply_fourier(riesz_fft(f1, 1), 0.5)) < 3e-3
        f3 = radial_bump(3, 64, 10.0, np.array([0.2, -0.1, 0.0]), 3.0)
        assert rel_l2(riesz_truncated_direct(f3, 3, 1.0), mt_apply_fourier(riesz_fft(f3, 3), 1.0)) < 2e-2

    @pytest.mark.parametrize("t", [0.1, 9.9])
    def test_unresolvable(self, t):
        with pytest.raises(GridResolutionError):
            riesz_truncated_direct(bump2(64, 20.0), 1, t)


class TestOutsideFraction:
    def test_far_cells(self):
        c = np.array([[5.0, 5.0], [0.0, 0.0]])
        assert np.allclose(outside_fraction(c, 1.0, 2.0), [1.0, 0.0])

    def test_total_area(self):
        h, t = 0.25, 1.3
        ax = (np.arange(-16, 16)) * h
        cx, cy = np.meshgrid(ax, ax, indexing="ij")
        frac = outside_fraction(np.stack([cx.ravel(), cy.ravel()], axis=1), h, t)
        inside = np.sum(1.0 - frac) * h * h
        assert inside == pytest.approx(math.pi * t * t, rel=1e-12)


class TestMultiplierOperators:
    def test_small_t_recovers(self):
        # 1 - m(x) ~ c_d x near 0, so the gap is about c_d t |xi| |g^|; keep |xi| <= 0.1
        n, box = 64, 20.0
        x = (np.arange(n) - n // 2) * box / n
        g = GridField(np.cos(2 * math.pi * x / box) + 0.5 * np.sin(4 * math.pi * x / box), box)
        out = mt_apply_fourier(g, 1e-6)
        assert np.max(np.abs(out.values - g.values)) < 1e-6

    @pytest.mark.parametrize("d, slope", [(1, 4.0), (2, math.pi), (3, 8.0 / 3.0)])
    def test_small_t_gap_is_linear(self, d, slope):
        n, box = 16, 4.0
        idx = (np.arange(n) - n // 2)
        g = GridField(np.cos(2 * math.pi * idx / n).reshape((n,) + (1,) * (d - 1)) * np.ones((n,) * d), box)
        t = 1e-6
        gap = lp_norm(g.with_values(g.values - mt_apply_fourier(g, t).values), 2) / lp_norm(g, 2)
        assert gap == pytest.approx(slope * t / box, rel=1e-4)

    @given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2, 3]), st.floats(1e-3, 50.0))
    @settings(max_examples=30)
    def test_exact_l2_contraction(self, seed, d, t):
        g = GridField(np.random.default_rng(seed).normal(size=(16,) * d), 4.0)
        assert lp_norm(mt_apply_fourier(g, t), 2) <= lp_norm(g, 2)

    def test_radial_symmetry(self):
        g = radial_bump(2, 64, 10.0, np.zeros(2), 3.0)
        out = mt_apply_fourier(g, 1.0).values
        # the centered grid is symmetric under transpose and under k -> -k
        assert np.allclose(out, out.T, atol=1e-14)
        inner = out[1:, 1:]
        assert np.allclose(inner, inner[::-1, ::-1], atol=1e-14)

    def test_conv_matches_fourier(self):
        g = bump2()
        for t in (0.5, 2.0):
            assert rel_l2(mt_apply_conv(g, t), mt_apply_fourier(g, t)) <= 3e-3

    def test_conv_defect_shrinks(self):
        errs = []
        for n in (64, 128, 256):
            g = bump2(n)
            errs.append(rel_l2(mt_apply_conv(g, 1.0), mt_apply_fourier(g, 1.0)))
        assert errs[0] > errs[1] > errs[2]

    def test_conv_nonnegative(self):
        g = bump2(128)
        assert mt_apply_conv(g, 1.0).values.min() >= -1e-14 * g.values.max()

    def test_conv_constant(self):
        out = mt_apply_conv(GridField(np.full((64, 64), 2.5), 20.0), 1.0)
        assert np.allclose(out.values, 2.5, rtol=1e-13)

    def test_conv_too_small(self):
        with pytest.raises(GridResolutionError):
            mt_apply_conv(bump2(64), 0.2)


class TestMaximal:
    def test_single_t(self):
        g = bump2(64)
        out = maximal_apply(g, TGrid(1.5, 2.0, 1))
        assert np.allclose(out.values, np.abs(mt_apply_fourier(g, 1.5).values), atol=1e-15)

    @pytest.mark.parametrize("route", ["fourier", "conv"])
    def test_refinement_monotone(self, route):
        g = riesz_fft(bump2(64), 1)
        coarse = maximal_apply(g, TGrid(1.0, 2.0, 3), route=route)
        longer = maximal_apply(g, TGrid(1.0, 2.0, 4), route=route)
        assert np.all(longer.values >= coarse.values)
        # interleaved radii agree with the coarse ones only up to roundoff in t
        fine = maximal_apply(g, TGrid(1.0, math.sqrt(2.0), 5), route=route)
        assert np.all(fine.values >= coarse.values * (1 - 1e-12))

    def test_constant_l2_bound(self):
        c = (2 + 1 / math.sqrt(2))
        for item in corpus(2, 128, 20.0, 6, seed=2):
            g = riesz_fft(item.field, 1)
            assert lp_norm(maximal_apply(g, TGrid.spanning(0.1, 10.0, 32)), 2) <= c * lp_norm(g, 2)

    def test_unknown_route(self):
        with pytest.raises(ValueError):
            maximal_apply(bump2(32, 10.0), TGrid(1.0, 2.0, 2), route="direct")

    def test_conv_route_floor(self):
        with pytest.raises(GridResolutionError):
            maximal_apply(bump2(64), TGrid(0.1, 2.0, 3), route="conv")
