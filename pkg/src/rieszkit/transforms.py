"""Riesz transforms, their truncations and the multiplier operators on grids.

All operators act on :class:`~rieszkit.grid.GridField` samples of a
function on the periodic box. Two independent routes are provided for the
truncated operators:

Fourier route
    ``R_j`` has symbol ``-i xi_j / |xi|`` and ``M^t`` has symbol ``m(t|xi|)``;
    the truncated transform is their product.
Spatial route
    ``R_j^t`` is convolution with the truncated kernel
    ``c_d y_j |y|^-(d+1) 1{|y| > t}`` and ``M^t`` is convolution with the
    sampled kernel ``phi_t``.

The spatial truncated kernel decays only like ``|y|^-d``, so its periodic
sum is handled with an Ewald split
``K = K Q(s, a^2|y|^2) + K P(s, a^2|y|^2)``, where ``P`` and ``Q`` are the
regularized incomplete gamma functions and ``s = (d+1)/2``. The second piece
is smooth with exact transform ``-i (xi_j/|xi|) erfc(pi |xi| / a)``; the
first, minus the excised ball, is short range and is sampled in space with
exact cell-fraction weights on the cells the sphere ``|y| = t`` cuts.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from scipy.special import erfc, gammainc

from .grid import GridField, TGrid, frequency_axis, frequency_index_sq
from .kernel import SampledKernel, sample_kernel
from .multiplier import m_values
from .specfun import gamma_fn

__all__ = [
    "GridResolutionError",
    "riesz_symbol",
    "multiplier_symbol",
    "riesz_fft",
    "riesz_truncated_direct",
    "mt_apply_fourier",
    "mt_apply_conv",
    "conv_kernel",
    "maximal_apply",
    "outside_fraction",
]


class GridResolutionError(ValueError):
    """A truncation radius is not resolvable on the given grid."""


def _to_fft(a: NDArray) -> NDArray:
    return np.fft.ifftshift(a)


def _from_fft(a: NDArray) -> NDArray:
    return np.fft.fftshift(a)


def _spectrum(f: GridField) -> NDArray[np.complex128]:
    return np.fft.fftn(_to_fft(f.values))


def _synthesize(spec: NDArray, like: GridField, real: bool) -> GridField:
    out = _from_fft(np.fft.ifftn(spec))
    return like.with_values(out.real.copy() if real else out)


def _check_axis(j: int, d: int) -> None:
    if not (isinstance(j, (int, np.integer)) and 1 <= j <= d):
        raise ValueError(f"axis index j must be in 1..{d}, got {j}")


def riesz_symbol(n: int, box_side: float, d: int, j: int) -> NDArray[np.complex128]:
    """FFT-ordered symbol ``-i xi_j / |xi|`` of ``R_j``.

    Zero at ``xi = 0`` and on the Nyquist plane of axis ``j``, where an
    odd imaginary symbol cannot keep real fields real.
    """
    _check_axis(j, d)
    freqs = frequency_axis(n, box_side)
    mesh = np.meshgrid(*([freqs] * d), indexing="ij")
    mag = np.sqrt(sum(m * m for m in mesh))
    sym = np.zeros(mag.shape, dtype=complex)
    nz = mag > 0
    sym[nz] = -1j * mesh[j - 1][nz] / mag[nz]
    index = [slice(None)] * d
    index[j - 1] = n // 2
    sym[tuple(index)] = 0.0
    return sym


@lru_cache(maxsize=8)
def _radius_classes(n: int, d: int) -> tuple[NDArray, NDArray]:
    """Distinct values of ``|k|^2`` on the lattice and the inverse index."""
    k2 = frequency_index_sq(n, d)
    uniq, inverse = np.unique(k2.ravel(), return_inverse=True)
    uniq.setflags(write=False)
    inverse.setflags(write=False)
    return uniq, inverse


@lru_cache(maxsize=256)
def _multiplier_cached(n: int, box_side: float, d: int, t: float) -> NDArray[np.float64]:
    uniq, inverse = _radius_classes(n, d)
    vals = m_values(t * np.sqrt(uniq.astype(float)) / box_side, d)
    out = vals[inverse].reshape((n,) * d)
    out.setflags(write=False)
    return out


def multiplier_symbol(n: int, box_side: float, d: int, t: float) -> NDArray[np.float64]:
    """FFT-ordered array ``m(t |xi_k|)`` (read-only, cached)."""
    if not t > 0:
        raise ValueError("t must be positive")
    return _multiplier_cached(int(n), float(box_side), int(d), float(t))


def riesz_fft(f: GridField, j: int) -> GridField:
    """``R_j f`` through the symbol ``-i xi_j / |xi|``."""
    sym = riesz_symbol(f.n, f.box_side, f.d, j)
    return _synthesize(_spectrum(f) * sym, f, real=not np.iscomplexobj(f.values))


def mt_apply_fourier(g: GridField, t: float) -> GridField:
    """``M^t g`` through the symbol ``m(t |xi|)``."""
    sym = multiplier_symbol(g.n, g.box_side, g.d, t)
    return _synthesize(_spectrum(g) * sym, g, real=not np.iscomplexobj(g.values))


# ---------------------------------------------------------------------------
# cell fractions outside a ball
# ---------------------------------------------------------------------------


def _disk_quadrant(x: NDArray, y: NDArray, radius: NDArray) -> NDArray:
    """Signed area of ``{0 <= u <= x, 0 <= v <= y, u^2 + v^2 < R^2}``.

    Odd in each of ``x`` and ``y``, so rectangle areas follow by
    inclusion-exclusion.
    """
    sx, sy = np.sign(x), np.sign(y)
    ax = np.minimum(np.abs(x), radius)
    ay = np.minimum(np.abs(y), radius)
    r2 = radius * radius

    def g(u):
        ratio = np.clip(u / np.where(radius > 0, radius, 1.0), -1.0, 1.0)
        return 0.5 * (u * np.sqrt(np.maximum(r2 - u * u, 0.0)) + r2 * np.arcsin(ratio))

    u0 = np.sqrt(np.maximum(r2 - ay * ay, 0.0))
    inside = ax * ax + ay * ay <= r2
    partial = ay * u0 + g(ax) - g(np.minimum(u0, ax))
    area = np.where(inside, ax * ay, partial)
    return sx * sy * area


def _square_disk_area(cx: NDArray, cy: NDArray, h: float, radius: NDArray) -> NDArray:
    x0, x1 = cx - 0.5 * h, cx + 0.5 * h
    y0, y1 = cy - 0.5 * h, cy + 0.5 * h
    return (
        _disk_quadrant(x1, y1, radius)
        - _disk_quadrant(x0, y1, radius)
        - _disk_quadrant(x1, y0, radius)
        + _disk_quadrant(x0, y0, radius)
    )


def outside_fraction(centers: NDArray, h: float, t: float, slices: int = 8) -> NDArray:
    """Fraction of each cell ``center + [-h/2, h/2]^d`` lying outside ``|y| < t``.

    Exact in 1D and 2D; in 3D the cell is cut into ``slices`` Gauss-Legendre
    slices along the last axis, each handled by the exact 2D formula.
    """
    d = centers.shape[1]
    if d == 1:
        c = centers[:, 0]
        lo = np.maximum(c - 0.5 * h, -t)
        hi = np.minimum(c + 0.5 * h, t)
        return 1.0 - np.maximum(hi - lo, 0.0) / h
    if d == 2:
        rad = np.full(centers.shape[0], float(t))
        return 1.0 - _square_disk_area(centers[:, 0], centers[:, 1], h, rad) / (h * h)
    if d == 3:
        nodes, weights = np.polynomial.legendre.leggauss(slices)
        inside = np.zeros(centers.shape[0])
        for zn, wn in zip(nodes, weights):
            z = centers[:, 2] + 0.5 * h * zn
            rad = np.sqrt(np.maximum(t * t - z * z, 0.0))
            inside += 0.5 * wn * _square_disk_area(centers[:, 0], centers[:, 1], h, rad) / (h * h)
        return 1.0 - inside
    raise ValueError("outside_fraction supports d <= 3")


# ---------------------------------------------------------------------------
# direct truncated transform
# ---------------------------------------------------------------------------

EWALD_SPLIT = 16.0


@lru_cache(maxsize=32)
def _direct_symbol(n: int, box_side: float, d: int, j: int, t: float) -> NDArray[np.complex128]:
    h = box_side / n
    s = 0.5 * (d + 1)
    c = gamma_fn(s) / math.pi**s
    alpha = EWALD_SPLIT / box_side
    axis = (np.arange(n) - n // 2) * h
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    r = np.sqrt(np.sum(pts**2, axis=1))
    kern = np.zeros_like(r)
    nz = r > 0
    kern[nz] = c * pts[nz, j - 1] / r[nz] ** (d + 1)
    weight = (r > t).astype(float)
    cut = np.abs(r - t) < h * math.sqrt(d)
    weight[cut] = outside_fraction(pts[cut], h, t)
    smooth = gammainc(s, (alpha * r) ** 2)
    spatial = (h**d * (weight - smooth) * kern).reshape((n,) * d)
    # The plane y_j = -L/2 has no mirror partner on the grid; zeroing it
    # keeps the discrete kernel odd (its values there are ~exp(-a^2 L^2/4)).
    index = [slice(None)] * d
    index[j - 1] = 0
    spatial[tuple(index)] = 0.0
    freqs = frequency_axis(n, box_side)
    fmesh = np.meshgrid(*([freqs] * d), indexing="ij")
    fmag = np.sqrt(sum(m * m for m in fmesh))
    long_range = riesz_symbol(n, box_side, d, j) * erfc(math.pi * fmag / alpha)
    out = np.fft.fftn(_to_fft(spatial)) + long_range
    out.setflags(write=False)
    return out


def riesz_truncated_direct(f: GridField, j: int, t: float) -> GridField:
    """``R_j^t f`` by periodic convolution with the truncated kernel.

    Requires ``t >= 2 h`` so that the excised ball is resolved.
    """
    _check_axis(j, f.d)
    h = f.spacing
    if t < 2.0 * h:
        raise GridResolutionError(f"t = {t} is below the grid floor 2h = {2 * h}")
    if t > 0.5 * f.box_side - h * math.sqrt(f.d):
        raise GridResolutionError("t must stay inside the periodic box")
    sym = _direct_symbol(f.n, float(f.box_side), f.d, int(j), float(t))
    return _synthesize(_spectrum(f) * sym, f, real=not np.iscomplexobj(f.values))


# ---------------------------------------------------------------------------
# kernel route for M^t
# ---------------------------------------------------------------------------


@lru_cache(maxsize=16)
def _conv_cached(t: float, d: int, n: int, box_side: float) -> tuple[SampledKernel, NDArray]:
    ker = sample_kernel(t, d, n, box_side)
    spec = np.fft.fftn(_to_fft(ker.values)) * (box_side / n) ** d
    spec.setflags(write=False)
    ker.values.setflags(write=False)
    return ker, spec


def conv_kernel(t: float, d: int, n: int, box_side: float) -> SampledKernel:
    """The sampled ``phi_t`` used by :func:`mt_apply_conv` (with its mass defect)."""
    return _conv_cached(float(t), int(d), int(n), float(box_side))[0]


def mt_apply_conv(g: GridField, t: float) -> GridField:
    """``M^t g`` by periodic convolution with the sampled kernel ``phi_t``."""
    h = g.spacing
    if t < 2.0 * h:
        raise GridResolutionError(f"t = {t} is below the grid floor 2h = {2 * h}")
    try:
        _, spec = _conv_cached(float(t), g.d, g.n, float(g.box_side))
    except ValueError as exc:
        raise GridResolutionError(str(exc)) from exc
    return _synthesize(_spectrum(g) * spec, g, real=not np.iscomplexobj(g.values))


# ---------------------------------------------------------------------------
# maximal operator
# ---------------------------------------------------------------------------


def maximal_apply(g: GridField, tg: TGrid, route: Literal["fourier", "conv"] = "fourier") -> GridField:
    """Pointwise ``max_k |M^{t_k} g|`` over the radii of ``tg``.

    A lower estimate of the supremum over all ``t > 0``.
    """
    if route not in ("fourier", "conv"):
        raise ValueError(f"unknown route {route!r}")
    spec = _spectrum(g)
    real = not np.iscomplexobj(g.values)
    best = np.zeros(g.values.shape)
    for t in tg.values:
        if route == "fourier":
            sym = multiplier_symbol(g.n, g.box_side, g.d, float(t))
        else:
            if t < 2.0 * g.spacing:
                raise GridResolutionError(f"t = {t} is below the grid floor")
            _, sym = _conv_cached(float(t), g.d, g.n, float(g.box_side))
        vals = np.fft.ifftn(spec * sym)
        mag = np.abs(vals.real) if real else np.abs(vals)
        np.maximum(best, mag, out=best)
    return g.with_values(_from_fft(best))
