import math

import numpy as np
import pytest
import scipy.special as sc
from hypothesis import assume, given
from hypothesis import strategies as st

from rieszkit.claims import HANKEL_TRIPLES
from rieszkit.grid import GridField, fourier_forward
from rieszkit.kernel import (
    KernelSplit,
    RadialKernel,
    boundary_term,
    hankel_oracle,
    kernel_constant,
    l1_norm_hypergeometric,
    l1_norm_quadrature,
    monotonicity_profile,
    phi_base,
    phi_t,
    sample_kernel,
    sphere_area,
)
from rieszkit.multiplier import m_values

# frozen from mpmath: K_d times 2F1 at 30 digits; the d=2 value is also
# reproduced by the Hankel oracle below
PHI_2_D2 = 0.011058606637216143664
PHI_HALF_D3 = 0.048153522550780226715


def scipy_phi(r, d):
    """Independent route through scipy's hyp2f1."""
    a, b, c = 0.5, (1 + d) / 2, (2 + d) / 2
    kd = math.gamma((1 + d) / 2) ** 2 / (math.pi ** (1 + d / 2) * math.gamma(1 + d / 2))
    if r < 1:
        return kd * sc.hyp2f1(a, b, c, r * r)
    return kd * r ** (-(d + 1)) * sc.hyp2f1(a, b, c, 1 / (r * r))


class TestPhi:
    @pytest.mark.parametrize("d", [1, 2, 3, 5, 8])
    def test_origin_is_constant(self, d):
        assert phi_base(0.0, d) == pytest.approx(kernel_constant(d), rel=1e-15)

    def test_frozen(self):
        assert phi_base(2.0, 2) == pytest.approx(PHI_2_D2, rel=1e-13)
        assert phi_t(0.5, 1.0, 3) == pytest.approx(PHI_HALF_D3, rel=1e-13)

    @given(st.integers(1, 8), st.floats(0.0, 0.999), st.booleans())
    def test_against_scipy(self, d, u, outer):
        r = 1 / (1 - u) if outer else u
        assume(abs(r - 1) >= 1e-3)
        assert phi_base(r, d) == pytest.approx(scipy_phi(r, d), rel=1e-11)

    @pytest.mark.parametrize(
        "d, r, expected",
        [
            (2, 1 + 1e-10, 1.1705277906404358934),
            (3, 1 - 1e-9, 0.65846064873732407087),
            (5, 1 + 1e-6, 0.26709250798998925972),
        ],
    )
    def test_near_edge_frozen(self, d, r, expected):
        # mpmath at 40 digits
        assert phi_base(r, d) == pytest.approx(expected, rel=1e-6)

    @pytest.mark.parametrize("d", [1, 2, 4])
    def test_tail_law(self, d):
        r = np.array([10.0, 100.0, 1000.0])
        ratio = phi_base(r, d) * r ** (d + 1) / kernel_constant(d)
        assert np.all(ratio > 1) and np.all(np.diff(ratio) < 0)
        assert ratio[-1] == pytest.approx(1.0, abs=1e-5)

    @given(st.floats(0.01, 10.0), st.floats(0.1, 5.0), st.integers(1, 6))
    def test_scaling_and_positivity(self, x, t, d):
        if abs(x - t) < 1e-9 * t:
            return
        val = phi_t(x, t, d)
        assert val > 0
        assert val == pytest.approx(phi_base(x / t, d) / t**d, rel=1e-14)

    @pytest.mark.parametrize("s", [0.3, 1.7])
    def test_scaling_identity(self, s):
        for d in (1, 2, 3):
            assert phi_t(2 * s, 2.0, d) == pytest.approx(phi_t(s, 1.0, d) / 2**d, rel=1e-14)

    def test_errors(self):
        with pytest.raises(ValueError):
            phi_base(1.0, 2)
        with pytest.raises(ValueError):
            phi_base(-0.5, 2)
        with pytest.raises(ValueError):
            phi_t(2.0, 2.0, 2)
        with pytest.raises(ValueError):
            phi_t(1.0, 0.0, 2)

    def test_radial_kernel(self):
        k = RadialKernel(3)
        assert k.constant == kernel_constant(3)
        assert k(0.4, 2.0) == phi_t(0.4, 2.0, 3)
        with pytest.raises(ValueError):
            RadialKernel(0)

    def test_sphere_area(self):
        assert sphere_area(2) == pytest.approx(2 * math.pi)
        assert sphere_area(3) == pytest.approx(4 * math.pi)


class TestHankelOracle:
    @pytest.mark.parametrize("x_norm, t, d", HANKEL_TRIPLES)
    def test_agreement(self, x_norm, t, d):
        assert phi_t(x_norm, t, d) == pytest.approx(hankel_oracle(x_norm, t, d), rel=1e-5)

    def test_errors(self):
        with pytest.raises(ValueError):
            hankel_oracle(1.0, 1.0, 2)
        with pytest.raises(ValueError):
            hankel_oracle(0.5, 1.0, 1)

    def test_boundary_term_decays(self):
        # the product beats at frequencies 1 +- t/|x|; its envelope falls off like 1/rho
        for x_norm, t, d in HANKEL_TRIPLES:
            sup_plain, sup_scaled = [], []
            for lo in (500.0, 2000.0):
                rho = np.arange(lo, 2 * lo, 0.05)
                b = np.abs(boundary_term(rho, x_norm, t, d))
                sup_plain.append(b.max())
                sup_scaled.append((rho * b).max())
            assert sup_plain[1] < 0.5 * sup_plain[0]
            assert sup_scaled[1] == pytest.approx(sup_scaled[0], rel=0.05)


class TestL1:
    @pytest.mark.parametrize("d", range(1, 9))
    def test_routes(self, d):
        q = l1_norm_quadrature(d)
        h = l1_norm_hypergeometric(d)
        assert isinstance(q, KernelSplit)
        assert q.total == pytest.approx(1.0, abs=1e-7)
        assert h.total == pytest.approx(1.0, abs=1e-8)
        assert q.l1_outer == pytest.approx(h.l1_outer, abs=1e-6)
        assert q.l1_inner == pytest.approx(h.l1_inner, abs=1e-6)
        assert q.l1_outer > 0 and q.l1_inner > 0

    @pytest.mark.parametrize("t", [0.5, 2.0])
    def test_t_independence(self, t):
        for d in (1, 3):
            assert l1_norm_quadrature(d, t=t).total == pytest.approx(l1_norm_quadrature(d).total, abs=1e-12)

    def test_d1_explicit_reduction(self):
        # d = 1: phi(r) = F(r^2) / pi^2 * Gamma(1)^2 / Gamma(3/2) with F = 2F1(1/2, 1; 3/2; .)
        # and 2F1(1/2, 1; 3/2; z) = artanh(sqrt z) / sqrt z
        from scipy.integrate import quad

        k1 = 1 / (math.pi**1.5 * math.gamma(1.5))
        inner_f = lambda r: 2 * k1 * (math.atanh(r) / r if r > 0 else 1.0)
        outer_f = lambda r: 2 * k1 * r**-2 * r * math.atanh(1 / r)
        inner, _ = quad(inner_f, 0, 1, limit=200)
        outer, _ = quad(outer_f, 1, np.inf, limit=200)
        split = l1_norm_hypergeometric(1)
        assert split.l1_inner == pytest.approx(inner, rel=1e-9)
        assert split.l1_outer == pytest.approx(outer, rel=1e-9)

    def test_d2_outer_closed_form(self):
        split = l1_norm_hypergeometric(2)
        pref = 2 * math.gamma(1.5) ** 2 / (math.pi * math.gamma(1) * math.gamma(2))
        assert split.l1_outer == pytest.approx(pref * 4 / math.pi, rel=1e-12)

    def test_split_pieces(self):
        split = l1_norm_quadrature(2)
        r = np.array([0.5, 1.5])
        assert split.outer(r)[0] == 0 and split.outer(r)[1] == phi_t(1.5, 1.0, 2)
        assert split.inner(r)[1] == 0 and split.inner(r)[0] == phi_t(0.5, 1.0, 2)


class TestMonotonicity:
    @pytest.mark.parametrize("d", [1, 2, 3, 5])
    def test_profile(self, d):
        rep = monotonicity_profile(d, 500)
        assert rep.inner_increasing and rep.outer_decreasing and rep.edge_increasing and rep.tail_from_above
        assert rep.ok and rep.violations == ()


class TestSampledKernel:
    def test_fourier_consistency(self):
        ker = sample_kernel(1.0, 2, 512, 40.0)
        spec = fourier_forward(GridField(ker.values, 40.0))
        xi = spec.radius()
        sel = xi <= 2.0
        assert np.max(np.abs(spec.values[sel] - m_values(xi[sel], 2))) <= 2e-3

    @pytest.mark.parametrize("d, n, box, t", [(1, 256, 20.0, 0.5), (2, 128, 20.0, 1.0), (3, 32, 10.0, 1.0)])
    def test_mass_and_positivity(self, d, n, box, t):
        ker = sample_kernel(t, d, n, box)
        h = box / n
        assert math.fsum(ker.values.ravel().tolist()) * h**d == pytest.approx(1.0, abs=1e-12)
        assert ker.values.min() > 0
        assert abs(ker.mass_defect) < 2e-2
        assert ker.treated_cells > 0

    def test_defect_shrinks(self):
        coarse = sample_kernel(1.0, 2, 128, 20.0).mass_defect
        fine = sample_kernel(1.0, 2, 512, 20.0).mass_defect
        assert abs(fine) < abs(coarse)

    def test_errors(self):
        with pytest.raises(ValueError):
            sample_kernel(0.1, 2, 128, 20.0)
        with pytest.raises(ValueError):
            sample_kernel(9.9, 2, 128, 20.0)
        with pytest.raises(ValueError):
            sample_kernel(1.0, 4, 16, 20.0)
