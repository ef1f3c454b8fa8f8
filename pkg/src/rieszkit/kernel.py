"""The convolution kernel of the multiplier operators.

The inverse Fourier transform of ``xi -> m(t |xi|)`` is the radial function

    phi_t(x) = phi(|x| / t) / t^d,
    phi(r)   = K_d r^-(d+1) F(1/r^2)   for r > 1,
    phi(r)   = K_d F(r^2)              for r < 1,

with ``K_d = Gamma((1+d)/2)^2 / (pi^(1+d/2) Gamma(1+d/2))`` and
``F = 2F1(1/2, (1+d)/2; (2+d)/2; .)``. Because the Gauss parameters satisfy
``c = a + b``, ``phi`` has a logarithmic singularity on the unit sphere.

This module evaluates ``phi`` and ``phi_t``, provides an independent
Hankel-integral route, computes the L1 mass by radial quadrature and by
unit-argument 3F2 sums, and samples ``phi_t`` on periodic grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .multiplier import _asymptotic_coefficients, m_values, tail_prefactor
from .specfun import (
    HypParams,
    SeriesControl,
    SeriesConvergenceError,
    bessel_j,
    gamma_fn,
    hankel_coefficients,
    hyp2f1_logarithmic,
    hyp_pfq,
    oscillatory_tail,
)

__all__ = [
    "RadialKernel",
    "KernelSplit",
    "MonotonicityReport",
    "SampledKernel",
    "kernel_constant",
    "sphere_area",
    "phi_base",
    "phi_t",
    "hankel_oracle",
    "boundary_term",
    "l1_norm_quadrature",
    "l1_norm_hypergeometric",
    "monotonicity_profile",
    "sample_kernel",
]


def kernel_constant(d: int) -> float:
    """``K_d = Gamma((1+d)/2)^2 / (pi^(1+d/2) Gamma(1+d/2))``."""
    return gamma_fn(0.5 * (1 + d)) ** 2 / (math.pi ** (1.0 + 0.5 * d) * gamma_fn(1.0 + 0.5 * d))


def sphere_area(d: int) -> float:
    """Surface area ``2 pi^(d/2) / Gamma(d/2)`` of the unit sphere in R^d."""
    return 2.0 * math.pi ** (0.5 * d) / gamma_fn(0.5 * d)


def _log_coefficient(d: int) -> float:
    """``Gamma(a+b) / (Gamma(a) Gamma(b))``: coefficient of ``-log(1-z)`` in F."""
    return gamma_fn(1.0 + 0.5 * d) / (gamma_fn(0.5) * gamma_fn(0.5 * (1 + d)))


def _check_d(d: int) -> int:
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d}")
    return int(d)


def phi_base(r: ArrayLike, d: int):
    """The kernel ``phi`` at radius ``r`` (``t = 1``).

    Raises
    ------
    ValueError
        If any ``r`` is negative or equal to 1 (logarithmic singularity).
    """
    d = _check_d(d)
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("r must be non-negative")
    if np.any(arr == 1.0):
        raise ValueError("phi is logarithmically singular at r = 1")
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    a, b = 0.5, 0.5 * (1 + d)
    kd = kernel_constant(d)
    inner = flat < 1.0
    if inner.any():
        ri = flat[inner]
        out[inner] = kd * hyp2f1_logarithmic(a, b, ri * ri, (1.0 - ri) * (1.0 + ri))
    outer = ~inner
    if outer.any():
        ro = flat[outer]
        inv = 1.0 / ro
        w = (ro - 1.0) * (ro + 1.0) * inv * inv
        out[outer] = kd * inv ** (d + 1) * hyp2f1_logarithmic(a, b, inv * inv, w)
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def phi_t(x_norm: ArrayLike, t: float, d: int):
    """``phi_t(x) = phi(|x| / t) / t^d``."""
    if not t > 0:
        raise ValueError("t must be positive")
    arr = np.asarray(x_norm, dtype=float)
    if np.any(arr == t):
        raise ValueError("phi_t is singular at |x| = t")
    return phi_base(arr / t, d) / t**d


@dataclass(frozen=True)
class RadialKernel:
    """The kernel ``phi`` in dimension ``d`` with its scaling rule."""

    d: int

    def __post_init__(self) -> None:
        _check_d(self.d)

    @property
    def constant(self) -> float:
        """Branch constant ``K_d``."""
        return kernel_constant(self.d)

    def __call__(self, r: ArrayLike, t: float = 1.0):
        return phi_t(r, t, self.d)


@dataclass(frozen=True)
class KernelSplit:
    """L1 masses of the outer (``|x| > t``) and inner (``|x| < t``) pieces."""

    d: int
    l1_outer: float
    l1_inner: float
    route: str

    @property
    def total(self) -> float:
        return self.l1_outer + self.l1_inner

    def outer(self, r: ArrayLike, t: float = 1.0):
        """``phi_t`` restricted to ``|x| > t`` (zero inside)."""
        arr = np.asarray(r, dtype=float)
        safe = np.where(arr > t, arr, 2.0 * t)
        return np.where(arr > t, phi_t(safe, t, self.d), 0.0)

    def inner(self, r: ArrayLike, t: float = 1.0):
        """``phi_t`` restricted to ``|x| < t`` (zero outside)."""
        arr = np.asarray(r, dtype=float)
        safe = np.where(arr < t, arr, 0.5 * t)
        return np.where(arr < t, phi_t(safe, t, self.d), 0.0)


# ---------------------------------------------------------------------------
# L1 mass
# ---------------------------------------------------------------------------

_GL20 = np.polynomial.legendre.leggauss(20)
_GL24 = np.polynomial.legendre.leggauss(24)


def _graded_nodes(levels: int = 40) -> tuple[NDArray, NDArray]:
    """Nodes and weights in ``delta = 1 - u`` on (0, 1], refined toward 0.

    Panels are ``[2^-(k+1), 2^-k]`` for ``k < levels`` plus ``[0, 2^-levels]``.
    """
    nodes, weights = _GL20
    edges = [2.0**-k for k in range(levels + 1)] + [0.0]
    xs, ws = [], []
    for hi, lo in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        xs.append(lo + half * (nodes + 1.0))
        ws.append(half * weights)
    return np.concatenate(xs), np.concatenate(ws)


def l1_norm_quadrature(d: int, t: float = 1.0, levels: int = 40) -> KernelSplit:
    """L1 masses of both pieces of ``phi_t`` by radial quadrature.

    The inner piece is ``omega * int_0^t phi_t(r) r^(d-1) dr`` and the outer
    piece is mapped to the unit interval by ``r = t/u``. Both integrands are
    sampled on panels that halve in width toward the singular radius.
    """
    d = _check_d(d)
    omega = sphere_area(d) if d > 1 else 2.0
    delta, w = _graded_nodes(levels)
    # inner: r = t (1 - delta)
    r_in = t * (1.0 - delta)
    inner = omega * t * math.fsum((w * phi_t(r_in, t, d) * r_in ** (d - 1)).tolist())
    # outer: r = t / u with u = 1 - delta, dr = t du / u^2
    u = 1.0 - delta
    r_out = t / u
    outer = omega * t * math.fsum((w * phi_t(r_out, t, d) * r_out ** (d - 1) / (u * u)).tolist())
    return KernelSplit(d, outer, inner, "radial-quadrature")


def l1_norm_hypergeometric(d: int, ctrl: SeriesControl | None = None) -> KernelSplit:
    """L1 masses from 3F2 sums at unit argument.

    ``outer = P 3F2(1/2, 1/2, (1+d)/2; 3/2, 1+d/2; 1)`` and
    ``inner = (P/d) 3F2(1/2, d/2, (1+d)/2; 1+d/2, 1+d/2; 1)``, with
    ``P = 2 Gamma((1+d)/2)^2 / (pi Gamma(d/2) Gamma(1+d/2))``.
    """
    d = _check_d(d)
    ctrl = ctrl or SeriesControl(rel_tol=1e-13)
    pref = 2.0 * gamma_fn(0.5 * (1 + d)) ** 2 / (math.pi * gamma_fn(0.5 * d) * gamma_fn(1.0 + 0.5 * d))
    outer = hyp_pfq(HypParams((0.5, 0.5, 0.5 * (1 + d)), (1.5, 1.0 + 0.5 * d), 1.0), ctrl)
    inner = hyp_pfq(HypParams((0.5, 0.5 * d, 0.5 * (1 + d)), (1.0 + 0.5 * d, 1.0 + 0.5 * d), 1.0), ctrl)
    return KernelSplit(d, pref * outer.value, pref / d * inner.value, "3F2-unit-argument")


# ---------------------------------------------------------------------------
# Hankel-integral oracle
# ---------------------------------------------------------------------------


def boundary_term(rho: ArrayLike, x_norm: float, t: float, d: int):
    """``m(t rho / (2 pi |x|)) rho^(d/2) J_{d/2}(rho)``."""
    rho = np.asarray(rho, dtype=float)
    lam = t / x_norm
    return m_values(lam * rho / (2.0 * math.pi), d) * rho ** (0.5 * d) * bessel_j(0.5 * d, rho)


def _hankel_tail(lam: float, d: int, big_r: float, order: int = 6) -> float:
    """Analytic tail ``int_R^inf m(lam rho / 2 pi) J_{(d-2)/2}(rho) rho^(d/2) drho``.

    Both factors are replaced by their large-argument expansions. Their
    product has the form ``rho^-1 Re[sum_p g_p rho^-p e^(i w rho)]`` with
    ``w = 1 +- lam``, and each term integrates to an incomplete-gamma
    type function ``G_p``.
    """
    s = 0.5 * (d + 1)
    mu = 0.5 * (d - 2)
    b = _asymptotic_coefficients(d)
    hk = hankel_coefficients(mu, order + 1)
    phase_m = 0.25 * (d + 1) * math.pi
    phase_j = 0.5 * mu * math.pi + 0.25 * math.pi
    alpha = [1j * np.exp(-1j * phase_m) * b[n] * lam ** (-float(n)) for n in range(order + 1)]
    beta = [np.exp(-1j * phase_j) * (1j**k) * hk[k] for k in range(order + 1)]
    pref = tail_prefactor(d) * math.sqrt(2.0 / math.pi) * lam ** (-s) * math.sqrt(2.0 / math.pi)
    total = 0j
    for freq, conj in ((1.0 + lam, False), (lam - 1.0, True)):
        for p in range(order + 1):
            g = sum(alpha[n] * (np.conj(beta[p - n]) if conj else beta[p - n]) for n in range(p + 1))
            w = abs(freq)
            integral = w**p * oscillatory_tail(p, w * big_r)[0]
            if freq < 0:
                integral = np.conj(integral)
            total += g * integral
    return float(0.5 * pref * total.real)


def _hankel_body(lam: float, d: int, n_panels: int) -> float:
    nodes, weights = _GL24
    left = np.arange(n_panels) * math.pi
    rho = (left[:, None] + 0.5 * math.pi * (nodes[None, :] + 1.0)).ravel()
    f = m_values(lam * rho / (2.0 * math.pi), d) * bessel_j(0.5 * (d - 2), rho) * rho ** (0.5 * d)
    panel = 0.5 * math.pi * (f.reshape(n_panels, -1) @ weights)
    return math.fsum(panel.tolist())


def hankel_oracle(x_norm: float, t: float, d: int, rho_max: float = 2000.0, rel_tol: float = 1e-7) -> float:
    """``phi_t(|x|)`` as a Hankel transform of the multiplier.

    ``phi_t(x) = (2 pi)^(-d/2) |x|^-d int_0^inf m(lam rho / 2 pi) J_{(d-2)/2}(rho) rho^(d/2) drho``
    with ``lam = t / |x|``. The integral is split into pi-length panels up
    to ``R`` and an analytic tail. The result is recomputed with a 25% larger
    ``R``; disagreement beyond ``rel_tol`` raises ``SeriesConvergenceError``.
    """
    d = _check_d(d)
    if d < 2:
        raise ValueError("the Hankel route needs d >= 2")
    if not (x_norm > 0 and t > 0) or x_norm == t:
        raise ValueError("need x_norm > 0, t > 0 and x_norm != t")
    lam = t / x_norm
    scale = (2.0 * math.pi) ** (-0.5 * d) * x_norm ** (-float(d))
    base = max(rho_max, 200.0 / lam, 200.0 / abs(1.0 - lam))
    estimates = []
    for factor in (1.0, 1.25):
        n_panels = int(math.ceil(factor * base / math.pi))
        big_r = n_panels * math.pi
        estimates.append(scale * (_hankel_body(lam, d, n_panels) + _hankel_tail(lam, d, big_r)))
    first, second = estimates
    if abs(first - second) > rel_tol * abs(second):
        raise SeriesConvergenceError(
            f"Hankel oracle unstable: {first!r} vs {second!r} at |x|={x_norm}, t={t}, d={d}"
        )
    return second


# ---------------------------------------------------------------------------
# monotonicity
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotonicityReport:
    """Outcome of a sampled monotonicity check of ``phi``."""

    d: int
    n_samples: int
    inner_increasing: bool
    outer_decreasing: bool
    edge_increasing: bool
    tail_from_above: bool
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return self.inner_increasing and self.outer_decreasing and self.edge_increasing


def monotonicity_profile(d: int, n_samples: int = 500, r_max: float = 50.0) -> MonotonicityReport:
    """Check that ``phi`` increases on (0,1), decreases on (1, r_max) and blows up at 1.

    Violations are listed in the report rather than raised.
    """
    d = _check_d(d)
    inner_r = np.linspace(0.0, 1.0, n_samples + 2)[1:-1]
    outer_r = np.linspace(1.0, r_max, n_samples + 2)[1:-1]
    inner_v = phi_base(inner_r, d)
    outer_v = phi_base(outer_r, d)
    violations: list[str] = []
    inc = bool(np.all(np.diff(inner_v) > 0))
    if not inc:
        violations.append(f"inner not increasing near r={inner_r[np.argmin(np.diff(inner_v))]:.4g}")
    dec = bool(np.all(np.diff(outer_v) < 0))
    if not dec:
        violations.append(f"outer not decreasing near r={outer_r[np.argmax(np.diff(outer_v))]:.4g}")
    ks = np.arange(2, 7)
    below = phi_base(1.0 - 10.0 ** (-ks.astype(float)), d)
    above = phi_base(1.0 + 10.0 ** (-ks.astype(float)), d)
    edge = bool(np.all(np.diff(below) > 0) and np.all(np.diff(above) > 0))
    if not edge:
        violations.append("edge values do not grow toward r = 1")
    tail_r = np.linspace(2.0, r_max, n_samples)
    tail = phi_base(tail_r, d) * tail_r ** (d + 1)
    kd = kernel_constant(d)
    from_above = bool(np.all(tail > kd) and np.all(np.diff(tail) < 0))
    if not from_above:
        violations.append("tail r^(d+1) phi does not decrease to K_d")
    return MonotonicityReport(d, n_samples, inc, dec, edge, from_above, tuple(violations))


# ---------------------------------------------------------------------------
# grid sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SampledKernel:
    """Periodized, cell-averaged samples of ``phi_t`` on a centered grid.

    ``values`` is indexed like the grid coordinates ``(i - n/2) h``.
    ``mass_defect`` is ``h^d sum(values) + far_field - 1`` before the
    samples were rescaled to unit discrete mass.
    """

    d: int
    n: int
    box_side: float
    t: float
    values: NDArray[np.float64]
    mass_defect: float
    far_field: float
    treated_cells: int


_IMAGE_DEPTH = {1: 16, 2: 3, 3: 1}


@lru_cache(maxsize=4)
def _pyramid_constant(d: int) -> float:
    """``int_{[-1,1]^(d-1)} (1 + |w|^2)^(-(d+1)/2) dw``."""
    if d == 1:
        return 1.0
    nodes, weights = np.polynomial.legendre.leggauss(64)
    if d == 2:
        return float(np.sum(weights * (1.0 + nodes**2) ** -1.5))
    w1, w2 = np.meshgrid(nodes, nodes, indexing="ij")
    ww = np.outer(weights, weights)
    return float(np.sum(ww * (1.0 + w1**2 + w2**2) ** -2.0))


def _far_field_mass(d: int, t: float, half_side: float) -> float:
    """Mass of ``phi_t`` outside the cube ``|y|_inf > half_side``.

    Uses the leading tail ``phi_t ~ K_d t |y|^-(d+1)``, accurate to relative
    order ``(t / half_side)^2``.
    """
    return kernel_constant(d) * t * 2.0 * d * _pyramid_constant(d) / half_side


def _g1(w: NDArray) -> NDArray:
    """Antiderivative ``w log|w| - w`` of ``log|w|``."""
    out = -w.copy()
    nz = w != 0
    out[nz] += w[nz] * np.log(np.abs(w[nz]))
    return out


def _cell_mean_log(s0: NDArray, normal: NDArray, h: float, order: int = 8) -> NDArray:
    """Mean of ``log|s0 + n . u|`` over the cube ``u in [-h/2, h/2]^d``.

    Exact along the dominant component of ``n``, Gauss-Legendre in the others.
    """
    d = normal.shape[1]
    dom = np.argmax(np.abs(normal), axis=1)
    rows = np.arange(normal.shape[0])
    nk = normal[rows, dom]
    if d == 1:
        offsets = [np.zeros_like(s0)]
        wts = [1.0]
    else:
        nodes, weights = np.polynomial.legendre.leggauss(order)
        keep = np.arange(d)[None, :] != dom[:, None]
        rest = normal[keep].reshape(normal.shape[0], d - 1)
        grids = np.meshgrid(*([nodes] * (d - 1)), indexing="ij")
        wgrid = np.ones_like(grids[0])
        for g in np.meshgrid(*([weights] * (d - 1)), indexing="ij"):
            wgrid = wgrid * g
        pts = np.stack([g.ravel() for g in grids], axis=1) * (0.5 * h)
        offsets = [rest @ p for p in pts]
        wts = (wgrid.ravel() / 2.0 ** (d - 1)).tolist()
    total = np.zeros_like(s0)
    for off, wt in zip(offsets, wts):
        c = s0 + off
        hi = c + 0.5 * h * nk
        lo = c - 0.5 * h * nk
        total += wt * (_g1(hi) - _g1(lo)) / (h * nk)
    return total


def _centered_coords(n: int, h: float) -> NDArray:
    return (np.arange(n) - n // 2) * h


def sample_kernel(
    t: float,
    d: int,
    n: int,
    box_side: float,
    ring_width: float = 1.5,
    band_width: float | None = None,
) -> SampledKernel:
    """Periodized samples of ``phi_t`` for periodic convolution.

    Write ``phi_t = (phi_t - S) + S`` with ``S = -A log| |y|/t - 1 |`` the
    log-leading term on the sphere ``|y| = t``. Cells whose centers lie
    within ``band_width * h`` of the sphere get the analytic cell mean of
    ``S``. Away from the sphere the regular part ``phi_t - S`` is point
    sampled. Within ``ring_width * h`` it is cell averaged by
    Gauss-Legendre instead. Point samples are used everywhere else.
    Periodic images out to ``_IMAGE_DEPTH[d]`` boxes are summed explicitly,
    the mass outside them is spread as a constant, and the samples are
    finally rescaled to unit discrete mass.
    """
    d = _check_d(d)
    if d > 3:
        raise ValueError("grid sampling supports d <= 3")
    if band_width is None:
        band_width = 12.0 if d < 3 else 6.0
    h = box_side / n
    if t < 2.0 * h:
        raise ValueError(f"t = {t} is below the grid floor 2h = {2 * h}")
    if t > 0.5 * box_side - (ring_width + 1.0) * h * math.sqrt(d):
        raise ValueError("t is too large for the periodic box")
    coords = _centered_coords(n, h)
    mesh = np.meshgrid(*([coords] * d), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    radius = np.sqrt(np.sum(pts**2, axis=1))
    values = np.zeros(pts.shape[0])
    band = (np.abs(radius - t) < band_width * h) & (radius > 0)
    ring = np.abs(radius - t) < ring_width * h
    plain = ~(band | ring)
    values[plain] = phi_t(radius[plain], t, d)

    amp = kernel_constant(d) * t ** (-float(d)) * _log_coefficient(d)

    def singular(rr: NDArray) -> NDArray:
        return -amp * np.log(np.abs(rr / t - 1.0))

    # regular part: point samples in the band, Gauss cell averages on the ring
    off_ring = band & ~ring
    values[off_ring] = phi_t(radius[off_ring], t, d) - singular(radius[off_ring])
    q = 6 if d < 3 else 4
    gn, gw = np.polynomial.legendre.leggauss(q)
    sub = np.stack([g.ravel() for g in np.meshgrid(*([gn] * d), indexing="ij")], axis=1) * (0.5 * h)
    subw = np.ones(sub.shape[0])
    for axis_w in np.meshgrid(*([gw] * d), indexing="ij"):
        subw = subw * axis_w.ravel()
    subw = subw / 2.0**d
    centers = pts[ring]
    regular = np.zeros(centers.shape[0])
    for off, wt in zip(sub, subw):
        y = centers + off
        ry = np.sqrt(np.sum(y**2, axis=1))
        ry = np.where(ry == t, np.nextafter(t, np.inf), ry)
        regular += wt * (phi_t(ry, t, d) - singular(ry))
    values[ring] = regular
    # singular part: exact cell means
    treated = band | ring
    cr = radius[treated]
    normal = pts[treated] / cr[:, None]
    values[treated] += -amp * (_cell_mean_log(cr - t, normal, h) - math.log(t))

    # explicit periodic images
    depth = _IMAGE_DEPTH[d]
    shifts = np.stack(
        [g.ravel() for g in np.meshgrid(*([np.arange(-depth, depth + 1)] * d), indexing="ij")], axis=1
    )
    for shift in shifts:
        if not shift.any():
            continue
        ry = np.sqrt(np.sum((pts + shift * box_side) ** 2, axis=1))
        values += phi_t(ry, t, d)
    far = _far_field_mass(d, t, (depth + 0.5) * box_side)
    mass = h**d * math.fsum(values.tolist()) + far
    values = (values + far / box_side**d) / mass
    out = values.reshape((n,) * d)
    return SampledKernel(d, n, box_side, t, out, mass - 1.0, far, int(treated.sum()))
