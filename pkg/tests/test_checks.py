import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rieszkit.checks import (
    NormReport,
    default_budget,
    hilbert_chain_constant,
    hilbert_maximal_d1,
    maximal_bound_of,
    maximal_constant,
    peaked_family,
    psi_norm,
    riesz_norm_constant,
    verify_contractivity,
    verify_maximal_bound,
    verify_operator_norm_lower,
    verify_young,
)
from rieszkit.corpus import corpus, radial_bump
from rieszkit.grid import GridField, TGrid


def bump2(n=256):
    return radial_bump(2, n, 20.0, np.array([0.7, -0.3]), 3.0)


class TestNormReport:
    @given(st.floats(0, 10), st.floats(0, 10), st.floats(0.5, 3), st.floats(0, 1))
    def test_margin_rule(self, lhs, rhs, c, budget):
        r = NormReport.build(2, lhs, rhs, c, budget)
        assert r.margin == c * rhs - lhs
        assert r.passed == (r.margin >= -budget)

    def test_budget_halves(self):
        assert default_budget(512, 3.0) == pytest.approx(default_budget(256, 3.0) / 2)
        assert default_budget(256, 1.0) == pytest.approx(1e-2)


class TestConstants:
    def test_h_p(self):
        assert riesz_norm_constant(2) == pytest.approx(1.0)
        assert riesz_norm_constant(4) == pytest.approx(1 + math.sqrt(2))
        assert riesz_norm_constant(4 / 3) == pytest.approx(1 + math.sqrt(2))
        assert riesz_norm_constant(3) == pytest.approx(math.sqrt(3))

    @given(st.floats(1.01, 50))
    def test_h_p_duality(self, p):
        q = p / (p - 1)
        assert riesz_norm_constant(p) == pytest.approx(riesz_norm_constant(q), rel=1e-9)

    def test_h_p_domain(self):
        with pytest.raises(ValueError):
            riesz_norm_constant(1.0)

    def test_maximal_constant(self):
        assert maximal_constant(2) == pytest.approx(2 + 1 / math.sqrt(2))
        assert maximal_constant(4) == pytest.approx(1.6453, abs=1e-4)
        assert maximal_constant(math.inf) == 1.0
        with pytest.raises(ValueError):
            maximal_constant(1.5)

    def test_psi(self):
        assert psi_norm() == pytest.approx(1 + math.log(2), abs=1e-9)
        c = hilbert_chain_constant()
        assert c == pytest.approx(3.7154, abs=1e-4) and c < 15 / 4


class TestContractivity:
    @pytest.mark.parametrize("t", [0.25, 1.0, 4.0])
    def test_p2_bump(self, t):
        assert verify_contractivity(bump2(), 1, t, 2).passed

    def test_p4_seeded(self):
        for item in corpus(2, 128, 20.0, 6, seed=4):
            rep = verify_contractivity(item.field, 2, 1.0, 4)
            assert rep.passed, item.label

    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 20.0))
    @settings(max_examples=20)
    def test_fourier_p2_exact(self, seed, t):
        f = GridField(np.random.default_rng(seed).normal(size=(32, 32)), 10.0)
        rep = verify_contractivity(f, 1, t, 2, route="fourier")
        assert rep.disc_err_budget == 0 and rep.margin >= 0

    def test_unknown_route(self):
        with pytest.raises(ValueError):
            verify_contractivity(bump2(64), 1, 1.0, 2, route="conv")


class TestYoung:
    @pytest.mark.parametrize("p", [2.0, 3.0, 4.0, math.inf])
    def test_young(self, p):
        for item in corpus(2, 64, 20.0, 3, seed=9):
            rep = verify_young(item.field, 1.5, p)
            assert rep.passed and rep.constant == pytest.approx(1.0, abs=1e-12)


class TestOperatorNorm:
    def test_p2_d1_isometry(self):
        rng = np.random.default_rng(0)
        spec = np.fft.fft(rng.normal(size=64))
        spec[0] = spec[32] = 0
        f = GridField(np.fft.ifft(spec).real, 5.0)
        rep = verify_operator_norm_lower([f], 1, 2)
        assert rep.lhs == pytest.approx(1.0, rel=1e-12) and rep.passed

    def test_p4_peaked(self):
        fam = peaked_family(65536, 20.0, 4)
        rep = verify_operator_norm_lower(fam, 1, 4)
        assert rep.lhs >= 1.8
        assert rep.passed and rep.constant == pytest.approx(1 + math.sqrt(2))

    @pytest.mark.parametrize("p", [3.0, 4.0, 6.0])
    def test_ratio_below_hp(self, p):
        fam = peaked_family(4096, 20.0, p) + [c.field for c in corpus(1, 4096, 20.0, 6)]
        assert verify_operator_norm_lower(fam, 1, p).passed

    def test_peaked_needs_p_above_2(self):
        with pytest.raises(ValueError):
            peaked_family(64, 1.0, 2)


class TestMaximal:
    def test_d1_chain(self):
        tg = TGrid.default(4096, 20.0)
        for item in corpus(1, 4096, 20.0, 10, kinds=("bump",)):
            rep = hilbert_maximal_d1(item.field, tg)
            assert rep.passed and rep.constant == 3.75 and "lower-route" in rep.label

    def test_d1_only(self):
        with pytest.raises(ValueError):
            hilbert_maximal_d1(bump2(32), TGrid(1.0, 2.0, 2))

    def test_p2_bump(self):
        rep = verify_maximal_bound(bump2(), 1, 2, TGrid.spanning(0.1, 10.0, 64))
        assert rep.passed and rep.constant == pytest.approx(2.7071, abs=1e-4)

    def test_p_inf_constant(self):
        g = GridField(np.full((64, 64), 1.7), 20.0)
        rep = maximal_bound_of(g, math.inf, TGrid(1.0, 2.0, 3), route="conv")
        assert rep.lhs == pytest.approx(rep.rhs, rel=1e-13) and rep.constant == 1.0

    def test_p4_seeded(self):
        tg = TGrid.spanning(0.1, 10.0, 32)
        for item in corpus(2, 128, 20.0, 6, seed=5):
            assert verify_maximal_bound(item.field, 2, 4, tg).passed

    def test_redirects_d1(self):
        with pytest.raises(ValueError):
            verify_maximal_bound(radial_bump(1, 64, 10.0, np.zeros(1), 2.0), 1, 2, TGrid(1.0, 2.0, 2))
