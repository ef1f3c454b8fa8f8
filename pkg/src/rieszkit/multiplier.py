"""The radial multiplier of the truncated Riesz transforms.

For dimension ``d`` the multiplier is

    m(x) = c_d * int_{2 pi x}^inf r^(-d/2) J_{d/2}(r) dr,
    c_d  = 2^(d/2) Gamma((d+1)/2) / sqrt(pi),

so that the Fourier symbol of the truncation at radius ``t`` is
``m(t |xi|)`` times the symbol of the untruncated transform. Three
independent evaluation routes are provided:

series
    ``m = 1 - C pi x 1F2(1/2; 3/2, 1 + d/2; -pi^2 x^2)``, accurate for small x.
integral
    ``m = 1 - I(x)`` with ``I(x) = (2/pi) int_0^{2 pi x} (1 - (t/2 pi x)^2)^((d-1)/2)
    sin(t)/t dt``, split into pi-length panels. Each panel is mapped by
    ``t = 2 pi x cos(theta)`` (which removes the endpoint singularity of the
    weight) and integrated by Gauss-Legendre.
asymptotic
    Large-x expansion obtained by integrating the Hankel expansion of
    ``J_{d/2}`` term by term.

``m_eval`` dispatches between them; ``m_values`` is its vectorized form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .specfun import (
    DEFAULT_CONTROL,
    HypParams,
    SeriesControl,
    bessel_j,
    gamma_fn,
    hankel_coefficients,
    hyp_pfq,
    sine_integral,
)

__all__ = [
    "X_SERIES_MAX",
    "X_ASYM_MIN",
    "MultiplierEval",
    "BlockDecomposition",
    "lower_bound",
    "m_series",
    "m_integral",
    "m_asymptotic",
    "m_eval",
    "m_values",
    "block_decompose",
    "m_derivative",
    "g_constant",
    "g_constant_quadrature",
    "a_d_check",
    "empirical_minimum",
]

X_SERIES_MAX = 2.0
X_ASYM_MIN = 20.0

Route = Literal["series", "integral", "asymptotic"]

_EPS = np.finfo(float).eps
_GL_HI = np.polynomial.legendre.leggauss(24)
_GL_LO = np.polynomial.legendre.leggauss(12)


def _check_d(d: int) -> int:
    if int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d}")
    return int(d)


def lower_bound() -> float:
    """The universal lower bound ``1 - (2/pi) Si(pi)`` of the multiplier."""
    return 1.0 - 2.0 / math.pi * float(sine_integral(math.pi))


def tail_prefactor(d: int) -> float:
    """``c_d = 2^(d/2) Gamma((d+1)/2) / sqrt(pi)``."""
    return 2.0 ** (0.5 * d) * gamma_fn(0.5 * (d + 1)) / math.sqrt(math.pi)


def series_prefactor(d: int) -> float:
    """``C(d) = Gamma((1+d)/2) / (Gamma(3/2) Gamma((2+d)/2))``."""
    return gamma_fn(0.5 * (1 + d)) / (gamma_fn(1.5) * gamma_fn(0.5 * (2 + d)))


@dataclass(frozen=True)
class MultiplierEval:
    """One evaluation of ``m(x)`` in dimension ``d``."""

    x: float
    d: int
    value: float
    route: Route
    err_est: float

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError("d must be at least 1")
        if not self.x >= 0:
            raise ValueError("x must be non-negative")
        if self.route not in ("series", "integral", "asymptotic"):
            raise ValueError(f"unknown route {self.route!r}")
        if self.err_est < 0:
            raise ValueError("err_est must be non-negative")


@dataclass(frozen=True)
class BlockDecomposition:
    """Alternating block form ``I(x) = (2/pi) (sum_j (-1)^j a_j + remainder)``."""

    x: float
    d: int
    k: int
    a_j: tuple[float, ...] = field(repr=False)
    remainder: float

    @property
    def integral(self) -> float:
        """Reassembled ``I(x)``."""
        signed = [a if j % 2 == 0 else -a for j, a in enumerate(self.a_j)]
        return 2.0 / math.pi * math.fsum(signed + [self.remainder])

    @property
    def value(self) -> float:
        """``m(x) = 1 - I(x)`` from the blocks."""
        return 1.0 - self.integral


# ---------------------------------------------------------------------------
# series route
# ---------------------------------------------------------------------------


def m_series(x: float, d: int, ctrl: SeriesControl = DEFAULT_CONTROL) -> MultiplierEval:
    """``m(x)`` from the 1F2 series (requires ``0 <= x <= X_SERIES_MAX``)."""
    d = _check_d(d)
    x = float(x)
    if x < 0:
        raise ValueError("x must be non-negative")
    if x > X_SERIES_MAX:
        raise ValueError(f"series route is limited to x <= {X_SERIES_MAX}")
    if x == 0.0:
        return MultiplierEval(0.0, d, 1.0, "series", 0.0)
    res = hyp_pfq(HypParams((0.5,), (1.5, 1.0 + 0.5 * d), -(math.pi * x) ** 2), ctrl)
    scale = series_prefactor(d) * math.pi * x
    # Cancellation: the largest term bounds the absolute rounding error.
    z = (math.pi * x) ** 2
    biggest = max(z**n / math.factorial(n) / math.prod(1.5 + k for k in range(n))
                  for n in range(int(math.sqrt(z)) + 2))
    err = scale * (res.err_est + 8.0 * _EPS * biggest)
    return MultiplierEval(x, d, 1.0 - scale * res.value, "series", err)


def _series_values(x: NDArray[np.float64], d: int) -> tuple[NDArray, NDArray]:
    z = -(math.pi * x) ** 2
    term = np.ones_like(x)
    total = np.ones_like(x)
    spread = np.ones_like(x)
    b2 = 1.0 + 0.5 * d
    for n in range(200):
        term = term * ((0.5 + n) / ((1.5 + n) * (b2 + n) * (n + 1))) * z
        total = total + term
        spread = np.maximum(spread, np.abs(term))
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    scale = series_prefactor(d) * math.pi * x
    return 1.0 - scale * total, scale * (np.abs(term) + 8.0 * _EPS * spread) + _EPS


# ---------------------------------------------------------------------------
# integral route
# ---------------------------------------------------------------------------


def _theta(t: NDArray, big_t: NDArray) -> NDArray:
    """``arccos(t / T)`` computed without cancellation near ``t = T``."""
    return np.arctan2(np.sqrt(np.maximum((big_t - t) * (big_t + t), 0.0)), t)


def _panel_matrix(x: NDArray[np.float64], d: int) -> tuple[NDArray, NDArray]:
    """Panel integrals of the I(x) integrand over ``[j pi, min((j+1) pi, 2 pi x)]``.

    Returns ``(values, errors)`` of shape ``(len(x), n_panels)``; panels
    beyond ``2 pi x`` are zero. Errors compare the 24- and 12-point rules.
    """
    big_t = 2.0 * math.pi * x
    n_panels = max(1, int(math.ceil(float(big_t.max()) / math.pi)))
    j = np.arange(n_panels, dtype=float)
    t_a = j * math.pi
    t_b = np.minimum(t_a[None, :] + math.pi, big_t[:, None])
    valid = t_a[None, :] < big_t[:, None]
    t_a2 = np.minimum(t_a[None, :], big_t[:, None])
    th_lo = _theta(t_b, big_t[:, None])
    th_hi = _theta(t_a2, big_t[:, None])
    mid = 0.5 * (th_hi + th_lo)
    half = 0.5 * (th_hi - th_lo)

    def rule(nodes, weights):
        th = mid[..., None] + half[..., None] * nodes
        u = big_t[:, None, None] * np.cos(th)
        g = big_t[:, None, None] * np.sin(th) ** d * np.sinc(u / math.pi)
        return half * (g @ weights)

    hi = np.where(valid, rule(*_GL_HI), 0.0)
    lo = np.where(valid, rule(*_GL_LO), 0.0)
    return hi, np.abs(hi - lo)


_CHUNK_BUDGET = 3_000_000


def _integral_values(x: NDArray[np.float64], d: int) -> tuple[NDArray, NDArray]:
    out = np.ones_like(x)
    err = np.zeros_like(x)
    pos = x > 0
    if not pos.any():
        return out, err
    xp = x[pos]
    if d == 1:
        si = sine_integral(2.0 * math.pi * xp)
        out[pos] = 1.0 - 2.0 / math.pi * si
        err[pos] = 4.0 * _EPS
        return out, err
    vals = np.empty_like(xp)
    errs = np.empty_like(xp)
    order = np.argsort(xp)
    xs = xp[order]
    start = 0
    while start < xs.size:
        stop = start + 1
        # grow the chunk while its largest x keeps the work within budget
        while stop < xs.size and (stop - start) * (2.0 * xs[stop] + 2.0) * 24 < _CHUNK_BUDGET:
            stop += 1
        chunk = xs[start:stop]
        hi, e = _panel_matrix(chunk, d)
        vals[order[start:stop]] = 1.0 - 2.0 / math.pi * np.sum(hi, axis=1)
        n_used = np.ceil(2.0 * chunk)
        errs[order[start:stop]] = 2.0 / math.pi * np.sum(e, axis=1) + 4.0 * _EPS * (1.0 + n_used)
        start = stop
    out[pos] = vals
    err[pos] = errs
    return out, err


def m_integral(x: float, d: int) -> MultiplierEval:
    """``m(x) = 1 - I(x)`` by pi-panel quadrature (``d = 1`` uses ``Si``)."""
    d = _check_d(d)
    x = float(x)
    if x < 0:
        raise ValueError("x must be non-negative")
    v, e = _integral_values(np.array([x]), d)
    return MultiplierEval(x, d, float(v[0]), "integral", float(e[0]))


def block_decompose(x: float, d: int) -> BlockDecomposition:
    """Blocks ``a_j(x)``, ``j = 0..2k-1`` with ``k = floor(x)``, and the remainder.

    ``a_j(x) = int_0^pi (1 - (t + j pi)^2 / (4 pi^2 x^2))^((d-1)/2)
    sin(t) / (t + j pi) dt`` and the remainder is the integral of the
    signed integrand over ``[2 k pi, 2 pi x]``.
    """
    d = _check_d(d)
    x = float(x)
    if x < 1.0:
        raise ValueError("block decomposition needs x >= 1")
    k = int(math.floor(x))
    hi, _ = _panel_matrix(np.array([x]), d)
    panels = hi[0]
    n_blocks = 2 * k
    signs = np.where(np.arange(panels.size) % 2 == 0, 1.0, -1.0)
    a_j = tuple(float(v) for v in (panels[:n_blocks] * signs[:n_blocks]))
    remainder = math.fsum(panels[n_blocks:].tolist())
    return BlockDecomposition(x, d, k, a_j, remainder)


# ---------------------------------------------------------------------------
# asymptotic route
# ---------------------------------------------------------------------------

_ASYM_TERMS = 40


@lru_cache(maxsize=64)
def _asymptotic_coefficients(d: int, count: int = _ASYM_TERMS) -> tuple[complex, ...]:
    """``b_N = sum_{k+n=N} i^k a_k(d/2) (s+k)_n (-i)^n`` with ``s = (d+1)/2``."""
    s = 0.5 * (d + 1)
    a = hankel_coefficients(0.5 * d, count)
    out = []
    for big_n in range(count):
        acc = 0j
        for k in range(big_n + 1):
            n = big_n - k
            poch = 1.0
            for i in range(n):
                poch *= s + k + i
            acc += (1j**k) * a[k] * poch * ((-1j) ** n)
        out.append(acc)
    return tuple(out)


def _asymptotic_values(
    x: NDArray[np.float64], d: int, n_terms: int | None = None
) -> tuple[NDArray, NDArray]:
    """Optimally truncated large-x expansion (or the first ``n_terms`` terms)."""
    b = np.array(_asymptotic_coefficients(d))
    s = 0.5 * (d + 1)
    big_t = 2.0 * math.pi * x
    limit = len(b) - 1 if n_terms is None else n_terms
    powers = big_t[:, None] ** (-np.arange(len(b), dtype=float))[None, :]
    terms = b[None, :] * powers
    mags = np.abs(terms)
    if n_terms is None:
        # Truncate where the running envelope (max over three consecutive
        # terms) starts to grow; the window guards against isolated zero
        # coefficients.
        win = np.maximum(np.maximum(mags[:, :-2], mags[:, 1:-1]), mags[:, 2:])
        rising = np.zeros(win.shape, dtype=bool)
        rising[:, 1:] = win[:, 1:] > win[:, :-1]
        cut = np.where(rising.any(axis=1), np.argmax(rising, axis=1), limit)
    else:
        cut = np.full(x.shape, limit)
    keep = np.arange(len(b))[None, :] < cut[:, None]
    total = np.sum(np.where(keep, terms, 0.0), axis=1)
    omitted = mags[np.arange(x.size), np.minimum(cut, len(b) - 1)]
    omega = big_t - 0.25 * (d + 1) * math.pi
    amp = tail_prefactor(d) * math.sqrt(2.0 / math.pi) * big_t ** (-s)
    value = amp * np.real(1j * np.exp(1j * omega) * total)
    return value, amp * omitted + 4.0 * _EPS * amp


def m_asymptotic(x: float, d: int) -> MultiplierEval:
    """Two-term large-x approximation, valid for ``x >= X_ASYM_MIN``.

    The leading term is
    ``-(2^((d+1)/2) Gamma((d+1)/2) / pi) (2 pi x)^(-(d+1)/2) sin(2 pi x - (d+1) pi / 4)``;
    the error estimate is three times the first omitted term.
    """
    d = _check_d(d)
    x = float(x)
    if x < X_ASYM_MIN:
        raise ValueError(f"asymptotic route needs x >= {X_ASYM_MIN}")
    v, e = _asymptotic_values(np.array([x]), d, n_terms=2)
    return MultiplierEval(x, d, float(v[0]), "asymptotic", 3.0 * float(e[0]))


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def m_values(x: ArrayLike, d: int, with_error: bool = False):
    """Vectorized ``m(x)``: series below 2, panels on [2, 20), expansion above.

    Parameters
    ----------
    x : array_like
        Non-negative arguments.
    d : int
        Dimension.
    with_error : bool
        Also return the per-point error estimate.
    """
    d = _check_d(d)
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("x must be non-negative")
    flat = arr.ravel()
    val = np.empty_like(flat)
    err = np.empty_like(flat)
    lo = flat < X_SERIES_MAX
    hi = flat >= X_ASYM_MIN
    mid = ~(lo | hi)
    for mask, fn in ((lo, _series_values), (mid, _integral_values), (hi, _asymptotic_values)):
        if mask.any():
            v, e = fn(flat[mask], d)
            val[mask] = v
            err[mask] = e
    val = val.reshape(arr.shape)
    if with_error:
        return val, err.reshape(arr.shape)
    return val


def _route_of(x: float) -> Route:
    if x < X_SERIES_MAX:
        return "series"
    if x < X_ASYM_MIN:
        return "integral"
    return "asymptotic"


def m_eval(x: float, d: int) -> MultiplierEval:
    """Evaluate ``m(x)`` with automatic route selection."""
    v, e = m_values(np.array([float(x)]), d, with_error=True)
    return MultiplierEval(float(x), int(d), float(v[0]), _route_of(float(x)), float(e[0]))


def m_derivative(x: ArrayLike, d: int):
    """``m'(x) = -c_d (2 pi x)^(-d/2) J_{d/2}(2 pi x) 2 pi`` for ``x > 0``."""
    d = _check_d(d)
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0):
        raise ValueError("m_derivative requires x > 0")
    big_t = 2.0 * math.pi * arr
    out = -tail_prefactor(d) * big_t ** (-0.5 * d) * bessel_j(0.5 * d, big_t) * 2.0 * math.pi
    return float(out) if np.ndim(out) == 0 else out


def empirical_minimum(d: int, x_max: float = 50.0, n: int = 2000) -> tuple[float, float]:
    """Grid search plus bounded refinement for the minimizer of ``m``.

    Returns ``(x_min, m_min)``; reported for information only.
    """
    from scipy.optimize import minimize_scalar

    grid = np.linspace(0.0, x_max, n)
    vals = m_values(grid, d)
    i = int(np.argmin(vals))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, n - 1)]
    res = minimize_scalar(lambda s: float(m_values(np.array([s]), d)[0]), bounds=(a, b),
                          method="bounded", options={"xatol": 1e-10})
    return float(res.x), float(res.fun)


# ---------------------------------------------------------------------------
# square-function constants
# ---------------------------------------------------------------------------


def g_constant(d: int) -> float:
    """``(2/pi) Gamma((d+1)/2)^2 / ((d-1) Gamma(d/2)^2)`` for ``d >= 2``."""
    d = _check_d(d)
    if d < 2:
        raise ValueError("the square-function constant needs d >= 2")
    return 2.0 / math.pi * gamma_fn(0.5 * (d + 1)) ** 2 / ((d - 1) * gamma_fn(0.5 * d) ** 2)


def g_constant_quadrature(d: int, rho_max: float = 2000.0) -> float:
    """``2^d Gamma((d+1)/2)^2 / pi * int_0^inf s^(1-d) J_{d/2}(s)^2 ds``.

    Gauss-Legendre on pi-length panels up to ``rho_max``, plus the tail
    ``(1/pi) [R^(1-d)/(d-1) - R^(-d) sin(2 omega_R)/2]`` from the Hankel
    expansion, with ``omega_R = R - (d+1) pi / 4``.
    """
    d = _check_d(d)
    if d < 2:
        raise ValueError("the integral diverges for d = 1")
    n_panels = int(round(rho_max / math.pi))
    big_r = n_panels * math.pi
    nodes, weights = _GL_HI
    left = np.arange(n_panels) * math.pi
    s = (left[:, None] + 0.5 * math.pi * (nodes[None, :] + 1.0)).ravel()
    f = s ** (1.0 - d) * bessel_j(0.5 * d, s) ** 2
    body = 0.5 * math.pi * math.fsum((f.reshape(n_panels, -1) @ weights).tolist())
    omega = big_r - 0.25 * (d + 1) * math.pi
    tail = (big_r ** (1.0 - d) / (d - 1) - big_r ** (-float(d)) * math.sin(2.0 * omega) / 2.0) / math.pi
    return 2.0**d * gamma_fn(0.5 * (d + 1)) ** 2 / math.pi * (body + tail)


def a_d_check(d: int) -> float:
    """``a_d = Gamma(1/2) Gamma(d/2) / Gamma((d+1)/2) * sqrt(d-1)``."""
    d = _check_d(d)
    if d < 2:
        raise ValueError("a_d is defined for d >= 2")
    return math.sqrt(math.pi) * gamma_fn(0.5 * d) / gamma_fn(0.5 * (d + 1)) * math.sqrt(d - 1)
