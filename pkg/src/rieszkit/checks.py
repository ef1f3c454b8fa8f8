"""Norm inequalities for the truncated, maximal and full Riesz transforms.

Every check returns a :class:`NormReport` with ``margin = constant * rhs - lhs``
and passes when ``margin >= -disc_err_budget``. Default budgets are
``1e-2 * rhs`` at ``n = 256`` and halve with each doubling of ``n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from .grid import GridField, TGrid, lp_norm
from .transforms import (
    conv_kernel,
    maximal_apply,
    mt_apply_conv,
    mt_apply_fourier,
    riesz_fft,
    riesz_truncated_direct,
)

__all__ = [
    "NormReport",
    "riesz_norm_constant",
    "maximal_constant",
    "default_budget",
    "verify_contractivity",
    "verify_young",
    "verify_operator_norm_lower",
    "peaked_family",
    "psi_norm",
    "hilbert_chain_constant",
    "hilbert_maximal_d1",
    "maximal_bound_of",
    "verify_maximal_bound",
]

# relative headroom for FFT roundoff in checks that hold exactly in exact arithmetic
ROUNDOFF = 1e-12


@dataclass(frozen=True)
class NormReport:
    """Outcome of one inequality ``lhs <= constant * rhs``.

    Attributes
    ----------
    p : float
        Lebesgue exponent (``math.inf`` for the max norm).
    lhs, rhs, constant : float
        The two sides and the constant of the inequality.
    margin : float
        ``constant * rhs - lhs``.
    disc_err_budget : float
        Allowed discretization error; the check passes iff
        ``margin >= -disc_err_budget``.
    label : str
        Short description of what was compared.
    route : str
        Computation route of the left-hand side.
    """

    p: float
    lhs: float
    rhs: float
    constant: float
    margin: float
    disc_err_budget: float
    label: str = ""
    route: str = ""

    @classmethod
    def build(cls, p, lhs, rhs, constant, budget, label="", route="") -> "NormReport":
        lhs, rhs, constant = float(lhs), float(rhs), float(constant)
        return cls(float(p), lhs, rhs, constant, constant * rhs - lhs, float(budget), label, route)

    @property
    def passed(self) -> bool:
        return self.margin >= -self.disc_err_budget

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs else math.inf


def riesz_norm_constant(p: float) -> float:
    """``H_p``: ``tan(pi / 2p)`` for ``1 < p <= 2`` and ``cot(pi / 2p)`` for ``p >= 2``."""
    if not p > 1:
        raise ValueError("H_p is finite only for p > 1")
    if math.isinf(p):
        return math.inf
    angle = math.pi / (2.0 * p)
    return math.tan(angle) if p <= 2 else 1.0 / math.tan(angle)


def maximal_constant(p: float) -> float:
    """``(2 + 1/sqrt 2)^(2/p)``, and ``1`` at ``p = inf``."""
    if math.isinf(p):
        return 1.0
    if p < 2:
        raise ValueError("the maximal bound is stated for p >= 2")
    return (2.0 + 1.0 / math.sqrt(2.0)) ** (2.0 / p)


def default_budget(n: int, scale: float, rel: float = 1e-2) -> float:
    """``rel * scale * 256 / n``: ``rel`` relative at ``n = 256``, halving per doubling."""
    return rel * scale * 256.0 / n


# ---------------------------------------------------------------------------
# contractivity of the truncations
# ---------------------------------------------------------------------------


def verify_contractivity(
    f: GridField,
    j: int,
    t: float,
    p: float,
    budget: float | None = None,
    route: Literal["direct", "fourier"] = "direct",
    rel_budget: float = 1e-2,
) -> NormReport:
    """Check ``||R_j^t f||_p <= ||R_j f||_p``.

    The ``"direct"`` route convolves with the truncated kernel. The
    ``"fourier"`` route applies ``m(t|xi|)`` to ``R_j f``; at ``p = 2`` it is
    an exact discrete statement and its default budget is zero.
    """
    rf = riesz_fft(f, j)
    rhs = lp_norm(rf, p)
    if route == "direct":
        lhs = lp_norm(riesz_truncated_direct(f, j, t), p)
    elif route == "fourier":
        lhs = lp_norm(mt_apply_fourier(rf, t), p)
    else:
        raise ValueError(f"unknown route {route!r}")
    if budget is None:
        budget = 0.0 if (route == "fourier" and p == 2) else default_budget(f.n, rhs, rel_budget)
    return NormReport.build(p, lhs, rhs, 1.0, budget, f"R_{j}^t vs R_{j}, t={t}", route)


def verify_young(g: GridField, t: float, p: float) -> NormReport:
    """Check ``||phi_t * g||_p <= (discrete kernel mass) ||g||_p`` on the conv route.

    Exact for the nonnegative sampled kernel, up to FFT roundoff, which is
    what the budget ``ROUNDOFF * rhs`` covers.
    """
    ker = conv_kernel(t, g.d, g.n, g.box_side)
    if ker.values.min() < 0:
        raise ArithmeticError("sampled kernel is not nonnegative")
    mass = math.fsum(ker.values.ravel().tolist()) * g.cell_volume
    lhs = lp_norm(mt_apply_conv(g, t), p)
    rhs = lp_norm(g, p)
    return NormReport.build(p, lhs, rhs, mass, ROUNDOFF * mass * rhs, f"Young, t={t}", "conv")


# ---------------------------------------------------------------------------
# operator norm of R_j from below
# ---------------------------------------------------------------------------


def peaked_family(n: int, box_side: float, p: float, fractions: Iterable[float] = (0.7, 0.8, 0.9, 0.95, 0.99)) -> list[GridField]:
    """Near-extremal fields for the periodic Hilbert transform at ``p > 2``.

    With ``theta = 2 pi (x - x0) / L`` and ``x0`` half a cell off the grid,
    ``F = i (i cot(theta/2))^gamma`` is the boundary value of an analytic
    function on the disc. Its real part has conjugate ``Im F - 1`` and
    ``|Im F| = cot(gamma pi / 2) |Re F|``. The family runs over
    ``gamma = fraction / p``.
    """
    if not p > 2:
        raise ValueError("the peaked family targets p > 2")
    h = box_side / n
    x = (np.arange(n) - n // 2) * h
    theta = 2.0 * math.pi * (x - 0.5 * h) / box_side
    cot = 1.0 / np.tan(0.5 * theta)
    out = []
    for frac in fractions:
        gam = frac / p
        vals = -np.sign(cot) * math.sin(0.5 * math.pi * gam) * np.abs(cot) ** gam
        out.append(GridField(vals, box_side))
    return out


def verify_operator_norm_lower(
    family: Iterable[GridField], j: int, p: float, budget: float = 1e-2
) -> NormReport:
    """Largest ``||R_j f||_p / ||f||_p`` over ``family`` against ``H_p``.

    ``lhs`` is the achieved ratio, a lower estimate of ``||R_j||_p``;
    ``rhs = 1`` and ``constant = H_p``, so ``margin`` is the remaining gap.
    """
    best = 0.0
    for f in family:
        den = lp_norm(f, p)
        if den == 0:
            continue
        best = max(best, lp_norm(riesz_fft(f, j), p) / den)
    return NormReport.build(p, best, 1.0, riesz_norm_constant(p), budget, f"sup ||R_{j} f||/||f||", "fourier")


# ---------------------------------------------------------------------------
# the one-dimensional chain
# ---------------------------------------------------------------------------


def psi_norm(order: int = 30) -> float:
    """``int |Psi|`` for ``Psi = 1/2`` on ``|x| < 1`` and ``1/(x(1+x^2))`` outside.

    The outer part is mapped by ``x = 1/u`` to ``2 int_0^1 u/(1+u^2) du``
    and integrated by Gauss-Legendre.
    """
    nodes, weights = np.polynomial.legendre.leggauss(order)
    u = 0.5 * (nodes + 1.0)
    outer = 2.0 * 0.5 * math.fsum((weights * u / (1.0 + u * u)).tolist())
    return 1.0 + outer


def hilbert_chain_constant(psi: float | None = None) -> float:
    """``(1 + sqrt 2)(1 + ||Psi||_1 / pi)``."""
    if psi is None:
        psi = psi_norm()
    return (1.0 + math.sqrt(2.0)) * (1.0 + psi / math.pi)


def hilbert_maximal_d1(
    f: GridField, tg: TGrid, budget: float | None = None, rel_budget: float = 1e-2
) -> NormReport:
    """Check ``||H^* f||_2 <= (15/4) ||H f||_2`` in one dimension.

    ``H^* f`` is the discrete supremum ``max_k |M^{t_k} H f|``, a lower
    route for the continuous supremum.
    """
    if f.d != 1:
        raise ValueError("hilbert_maximal_d1 needs a one-dimensional field")
    hf = riesz_fft(f, 1)
    rhs = lp_norm(hf, 2)
    lhs = lp_norm(maximal_apply(hf, tg), 2)
    if budget is None:
        budget = default_budget(f.n, rhs, rel_budget)
    return NormReport.build(2, lhs, rhs, 15.0 / 4.0, budget, "H^* vs H (lower-route check)", "fourier")


# ---------------------------------------------------------------------------
# maximal bound in d >= 2
# ---------------------------------------------------------------------------


def maximal_bound_of(
    g: GridField,
    p: float,
    tg: TGrid,
    budget: float | None = None,
    route: str = "fourier",
    rel_budget: float = 1e-2,
) -> NormReport:
    """Check ``||sup_k |M^{t_k} g| ||_p <= C_p ||g||_p`` for a given ``g``."""
    rhs = lp_norm(g, p)
    lhs = lp_norm(maximal_apply(g, tg, route=route), p)
    if budget is None:
        budget = default_budget(g.n, rhs, rel_budget)
    return NormReport.build(p, lhs, rhs, maximal_constant(p), budget, "M^* (lower-route check)", route)


def verify_maximal_bound(
    f: GridField, j: int, p: float, tg: TGrid, budget: float | None = None, rel_budget: float = 1e-2
) -> NormReport:
    """Check ``||R_j^* f||_p <= (2 + 1/sqrt 2)^(2/p) ||R_j f||_p`` for ``d >= 2``.

    Uses ``R_j^t f = M^t R_j f``, so ``R_j^* f`` is the discrete maximal
    function of ``R_j f``. ``p = inf`` uses the constant 1.
    """
    if f.d == 1:
        raise ValueError("d = 1 is covered by hilbert_maximal_d1")
    rep = maximal_bound_of(riesz_fft(f, j), p, tg, budget, rel_budget=rel_budget)
    return NormReport(rep.p, rep.lhs, rep.rhs, rep.constant, rep.margin, rep.disc_err_budget,
                      f"R_{j}^* vs R_{j} (lower-route check)", rep.route)

