"""Registry of verifiable claims and the report rows they produce.

Each claim id maps to a function of a :class:`ClaimContext` that returns one
or more :class:`VerifyReport` rows. The ids are frozen strings; CI
configurations refer to them directly.

Tolerances come from :data:`DEFAULT_TOLERANCES`, may be overridden per name,
and are all multiplied by the ``RIESZKIT_TOL_SCALE`` environment variable.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import checks
from .corpus import corpus, radial_bump
from .grid import GridField, TGrid, lp_norm
from .kernel import (
    boundary_term,
    hankel_oracle,
    l1_norm_hypergeometric,
    l1_norm_quadrature,
    phi_t,
)
from .multiplier import (
    a_d_check,
    g_constant,
    g_constant_quadrature,
    lower_bound,
    m_values,
)
from .transforms import (
    conv_kernel,
    mt_apply_conv,
    mt_apply_fourier,
    riesz_fft,
    riesz_truncated_direct,
)

__all__ = [
    "VerifyReport",
    "ClaimContext",
    "CLAIMS",
    "DEFAULT_TOLERANCES",
    "HANKEL_TRIPLES",
    "resolve_tolerances",
    "run_claims",
    "relative_l2",
]

DEFAULT_TOLERANCES: dict[str, float] = {
    "bounds": 1e-8,
    "l1": 1e-6,
    "hankel": 1e-5,
    "cor13": 0.0,
    "factorization": 1e-2,
    "contract": 1e-2,
    "maximal": 1e-2,
    "g": 1e-6,
    "a_d": 1e-12,
    "psi": 1e-9,
    "hilbert": 1e-2,
    "decay": 0.1,
    "boundary": 1e-2,
    "riesz_norm": 1e-2,
    "mt_routes": 3e-3,
}

# (|x|, t, d) sample points: both branches, and z = 0.99 on each side of the edge
HANKEL_TRIPLES: tuple[tuple[float, float, int], ...] = (
    (2.0, 1.0, 2),
    (0.5, 1.0, 3),
    (1.5, 1.0, 2),
    (0.3, 1.0, 2),
    (math.sqrt(0.99), 1.0, 2),
    (1.0 / math.sqrt(0.99), 1.0, 3),
    (3.0, 2.0, 4),
    (0.8, 2.0, 4),
    (5.0, 1.0, 5),
    (1.2, 2.0, 5),
    (0.7, 0.5, 3),
    (0.25, 0.5, 2),
)


@dataclass(frozen=True)
class VerifyReport:
    """One row of a verification report.

    Attributes
    ----------
    claim_id : str
        Frozen claim identifier.
    status : {"pass", "fail"}
    computed, reference : tuple of float
        What was computed and what it is compared against.
    tolerance : float
        Tolerance after scaling.
    rule : str
        How ``status`` follows from the numbers.
    route : str
        Computation route(s).
    params : dict
        Parameters that identify the row within its claim.
    """

    claim_id: str
    status: str
    computed: tuple[float, ...]
    reference: tuple[float, ...]
    tolerance: float
    rule: str
    route: str
    params: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def sort_key(self) -> tuple:
        return (self.claim_id, sorted((k, str(v)) for k, v in self.params.items()))

    def to_dict(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "status": self.status,
            "computed": list(self.computed),
            "reference": list(self.reference),
            "tolerance": self.tolerance,
            "rule": self.rule,
            "route": self.route,
            "params": dict(self.params),
        }


def _row(claim_id, ok, computed, reference, tol, rule, route, **params) -> VerifyReport:
    as_tuple = lambda v: tuple(float(x) for x in (v if isinstance(v, (list, tuple)) else [v]))
    return VerifyReport(claim_id, "pass" if ok else "fail", as_tuple(computed), as_tuple(reference),
                        float(tol), rule, route, params)


def resolve_tolerances(overrides: dict[str, float] | None = None) -> dict[str, float]:
    """Defaults, then ``overrides``, then the ``RIESZKIT_TOL_SCALE`` factor."""
    tol = dict(DEFAULT_TOLERANCES)
    for key, val in (overrides or {}).items():
        if key not in tol:
            raise KeyError(f"unknown tolerance name {key!r}; known: {sorted(tol)}")
        tol[key] = float(val)
    raw = os.environ.get("RIESZKIT_TOL_SCALE", "1")
    try:
        scale = float(raw)
    except ValueError as exc:
        raise ValueError(f"RIESZKIT_TOL_SCALE must be a number, got {raw!r}") from exc
    if not scale > 0:
        raise ValueError("RIESZKIT_TOL_SCALE must be positive")
    return {k: v * scale for k, v in tol.items()}


@dataclass(frozen=True)
class ClaimContext:
    """Selections and overrides shared by all claims.

    ``None`` fields fall back to each claim's own defaults.
    """

    dims: tuple[int, ...] | None = None
    ps: tuple[float, ...] | None = None
    grid_n: int | None = None
    box: float | None = None
    tgrid: TGrid | None = None
    seed: int = 0
    tol: dict = field(default_factory=resolve_tolerances)

    def pick_dims(self, supported: Sequence[int], default: Sequence[int] | None = None) -> list[int]:
        if self.dims is None:
            return list(supported if default is None else default)
        chosen = [d for d in self.dims if d in supported]
        if not chosen:
            raise ValueError(f"none of d = {list(self.dims)} is supported here (supported: {list(supported)})")
        return chosen

    def pick_ps(self, supported: Sequence[float]) -> list[float]:
        if self.ps is None:
            return list(supported)
        chosen = [p for p in self.ps if p in supported]
        if not chosen:
            raise ValueError(f"none of p = {list(self.ps)} is supported here (supported: {list(supported)})")
        return chosen


def relative_l2(a: GridField, b: GridField) -> float:
    """``||a - b||_2 / ||b||_2``."""
    return lp_norm(a.with_values(a.values - b.values), 2) / lp_norm(b, 2)


# ---------------------------------------------------------------------------
# multiplier and kernel claims
# ---------------------------------------------------------------------------


def claim_bounds(ctx: ClaimContext) -> list[VerifyReport]:
    tol = ctx.tol["bounds"]
    lb = lower_bound()
    x = np.linspace(0.0, 50.0, 2000)
    rows = []
    for d in ctx.pick_dims(range(1, 9)):
        v = m_values(x, d)
        top = int(np.argmax(v))
        ok = v.min() >= lb - tol and v.max() <= 1.0 + tol and top == 0 and abs(v[0] - 1.0) <= tol
        rows.append(_row("thm1.1-bounds", ok, [v.min(), v.max()], [lb, 1.0], tol,
                         "lb - tol <= min, max <= 1 + tol, argmax at x = 0", "series|integral|asymptotic",
                         d=d, x_argmin=float(x[int(np.argmin(v))])))
    return rows


def claim_l1(ctx: ClaimContext) -> list[VerifyReport]:
    tol = ctx.tol["l1"]
    rows = []
    for d in ctx.pick_dims(range(1, 9)):
        q = l1_norm_quadrature(d).total
        h = l1_norm_hypergeometric(d).total
        ok = abs(q - 1) <= tol and abs(h - 1) <= tol and abs(q - h) <= tol
        rows.append(_row("thm1.2-l1", ok, [q, h], [1.0, 1.0], tol,
                         "|each - 1| <= tol and |quadrature - 3F2| <= tol", "graded-quadrature|3F2", d=d))
    return rows


def claim_hankel(ctx: ClaimContext) -> list[VerifyReport]:
    tol = ctx.tol["hankel"]
    rows = []
    for x_norm, t, d in HANKEL_TRIPLES:
        if ctx.dims is not None and d not in ctx.dims:
            continue
        val = phi_t(x_norm, t, d)
        ref = hankel_oracle(x_norm, t, d)
        ok = abs(val - ref) <= tol * abs(ref)
        rows.append(_row("kernel-hankel", ok, val, ref, tol, "|phi - oracle| <= tol |oracle|",
                         "2F1-closed-form vs hankel-quadrature", d=d, x_norm=x_norm, t=t))
    if not rows:
        raise ValueError("no sample triple matches the requested dimensions")
    return rows


def claim_decay(ctx: ClaimContext) -> list[VerifyReport]:
    tol_v = ctx.tol["decay"]
    tol_b = ctx.tol["boundary"]
    rows = []
    x = np.linspace(20.0, 200.0, 180001)
    for d in ctx.pick_dims(range(1, 6)):
        env = x ** (0.5 * (d + 1)) * np.abs(m_values(x, d))
        # local maxima over unit windows (one oscillation) across [100, 200]
        peaks = np.array([env[(x >= a) & (x < a + 1)].max() for a in range(100, 200)])
        spread = (peaks.max() - peaks.min()) / peaks.max()
        ok = bool(np.isfinite(env.max())) and spread < tol_v
        rows.append(_row("multiplier-decay", ok, [env.max(), spread], [math.inf, tol_v], tol_v,
                         "sup finite and top-octave spread of x^((d+1)/2)|m| < tol", "m_values",
                         d=d, part="envelope"))
    for x_norm, t, d in HANKEL_TRIPLES:
        if ctx.dims is not None and d not in ctx.dims:
            continue
        val = abs(float(boundary_term(2000.0, x_norm, t, d)))
        rows.append(_row("multiplier-decay", val <= tol_b, val, 0.0, tol_b,
                         "|m(t rho / 2 pi |x|) rho^(d/2) J_(d/2)(rho)| <= tol at rho = 2000", "m_values*bessel_j",
                         d=d, part="boundary", x_norm=x_norm, t=t))
    return rows


def claim_g(ctx: ClaimContext) -> list[VerifyReport]:
    tol = ctx.tol["g"]
    rows = []
    for d in ctx.pick_dims(range(2, 11)):
        g = g_constant(d)
        q = g_constant_quadrature(d)
        ok = g <= 0.5 + 1e-15 and abs(q - g) <= tol
        rows.append(_row("g-constant", ok, [g, q], [0.5, g], tol,
                         "closed form <= 1/2 and |quadrature - closed form| <= tol", "closed-form|bessel-quadrature",
                         d=d))
    return rows


def claim_a_d(ctx: ClaimContext) -> list[VerifyReport]:
    tol = ctx.tol["a_d"]
    exact = {2: 2.0, 3: math.pi / math.sqrt(2.0)}
    rows = []
    for d in ctx.pick_dims(range(2, 11)):
        a = a_d_check(d)
        if d in exact:
            ok = abs(a - exact[d]) <= tol and a >= 2.0 - tol
            rows.append(_row("a_d", ok, a, exact[d], tol, "|a_d - exact| <= tol", "gamma-ratio", d=d))
        else:
            rows.append(_row("a_d", a >= 2.0 - tol, a, 2.0, tol, "a_d >= 2 - tol", "gamma-ratio", d=d))
    return rows


# ---------------------------------------------------------------------------
# grid claims
# ---------------------------------------------------------------------------


def _grid(ctx: ClaimContext, n_default: int, box_default: float = 20.0) -> tuple[int, float]:
    return (ctx.grid_n or n_default, ctx.box or box_default)


def claim_cor13(ctx: ClaimContext) -> list[VerifyReport]:
    tol = ctx.tol["cor13"]
    n, box = _grid(ctx, 256)
    rows = []
    for d in ctx.pick_dims((1, 2)):
        worst, violations = 0.0, 0
        for cf in corpus(d, n, box, 20, ctx.seed):
            g = riesz_fft(cf.field, 1)
            rhs = lp_norm(g, 2)
            for t in (0.25, 1.0, 4.0):
                lhs = lp_norm(mt_apply_fourier(g, t), 2)
                violations += lhs > rhs * (1.0 + tol)
                worst = max(worst, lhs / rhs)
        rows.append(_row("cor1.3", violations == 0, worst, 1.0, tol,
                         "||M^t R_1 f||_2 <= (1 + tol) ||R_1 f||_2 on every case", "fourier",
                         d=d, n=n, box=box, fields=20, violations=violations))
    return rows


def _factorization_bump(n: int, box: float) -> GridField:
    return radial_bump(2, n, box, np.array([0.7, -0.3]), 3.0)


def claim_factorization(ctx: ClaimContext) -> list[VerifyReport]:
    tol = ctx.tol["factorization"]
    n, box = _grid(ctx, 256)
    rows = []
    coarse = _factorization_bump(n, box)
    fine = _factorization_bump(2 * n, box)
    for t in (0.5, 1.0, 2.0):
        errs = []
        for f in (coarse, fine):
            direct = riesz_truncated_direct(f, 1, t)
            via = mt_apply_fourier(riesz_fft(f, 1), t)
            errs.append(lp_norm(direct.with_values(direct.values - via.values), 2) / lp_norm(f, 2))
        reduction = errs[0] / errs[1]
        ok = errs[0] <= tol and reduction >= 1.5
        rows.append(_row("factorization", ok, [errs[0], errs[1], reduction], [tol, tol, 1.5], tol,
                         "error at n <= tol and error(n)/error(2n) >= 1.5", "direct vs fourier",
                         d=2, n=n, box=box, t=t))
    return rows


def claim_mt_routes(ctx: ClaimContext) -> list[VerifyReport]:
    tol = ctx.tol["mt_routes"]
    n, box = _grid(ctx, 256)
    f = _factorization_bump(n, box)
    rows = []
    for t in (0.5, 1.0, 2.0):
        err = relative_l2(mt_apply_conv(f, t), mt_apply_fourier(f, t))
        defect = conv_kernel(t, 2, n, box).mass_defect
        defect_fine = conv_kernel(t, 2, 2 * n, box).mass_defect
        ok = err <= tol and abs(defect_fine) < abs(defect)
        rows.append(_row("mt-routes", ok, [err, defect, defect_fine], [tol, 0.0, 0.0], tol,
                         "relative L2 gap <= tol and |mass defect| shrinks under refinement", "conv vs fourier",
                         d=2, n=n, box=box, t=t))
    return rows


def claim_contract(ctx: ClaimContext) -> list[VerifyReport]:
    rel = ctx.tol["contract"]
    n, box = _grid(ctx, 256)
    rows = []
    for d in ctx.pick_dims((1, 2)):
        fields = corpus(d, n, box, 20, ctx.seed)
        for p in ctx.pick_ps((2.0, 3.0, 4.0)):
            worst, fails = -math.inf, 0
            for cf in fields:
                for t in (0.25, 1.0, 4.0):
                    rep = checks.verify_contractivity(cf.field, 1, t, p, rel_budget=rel)
                    fails += not rep.passed
                    worst = max(worst, rep.ratio)
            tol = checks.default_budget(n, 1.0, rel)
            rows.append(_row("thm1.4-contract", fails == 0, worst, 1.0, tol,
                             "||R^t_1 f||_p <= (1 + tol) ||R_1 f||_p on every case", "direct",
                             d=d, p=p, n=n, box=box, fields=20))
        # exact discrete p = 2 statement on the Fourier route
        worst, fails = 0.0, 0
        for cf in fields:
            for t in (0.25, 1.0, 4.0):
                rep = checks.verify_contractivity(cf.field, 1, t, 2.0, budget=0.0, route="fourier")
                fails += not rep.passed
                worst = max(worst, rep.ratio)
        rows.append(_row("thm1.4-contract", fails == 0, worst, 1.0, 0.0,
                         "margin >= 0 exactly on every case", "fourier", d=d, p=2.0, n=n, box=box, fields=20))
    return rows


def _maximal_tgrid(ctx: ClaimContext) -> TGrid:
    return ctx.tgrid or TGrid.spanning(0.1, 10.0, 64)


def claim_maximal(ctx: ClaimContext) -> list[VerifyReport]:
    rel = ctx.tol["maximal"]
    n, box = _grid(ctx, 256)
    tg = _maximal_tgrid(ctx)
    rows = []
    for d in ctx.pick_dims((2, 3), default=(2,)):
        n_d = n if d == 2 else min(n, 64)
        fields = corpus(d, n_d, box, 10, ctx.seed)
        for p in ctx.pick_ps((2.0, 3.0, 4.0, math.inf)):
            const = checks.maximal_constant(p)
            worst, fails = 0.0, 0
            for cf in fields:
                rep = checks.verify_maximal_bound(cf.field, 1, p, tg, rel_budget=rel)
                fails += not rep.passed
                worst = max(worst, rep.ratio)
            rows.append(_row("thm1.5-maximal", fails == 0, worst, const, checks.default_budget(n_d, 1.0, rel),
                             "||R_1^* f||_p <= (C_p + tol) ||R_1 f||_p on every case (lower-route check)",
                             "fourier", d=d, p=p, n=n_d, box=box, fields=10, t_count=tg.count))
    return rows


def claim_hilbert(ctx: ClaimContext) -> list[VerifyReport]:
    if ctx.dims is not None and 1 not in ctx.dims:
        raise ValueError("d1-hilbert is a one-dimensional claim")
    rows = []
    psi = checks.psi_norm()
    ref = 1.0 + math.log(2.0)
    rows.append(_row("d1-hilbert", abs(psi - ref) <= ctx.tol["psi"], psi, ref, ctx.tol["psi"],
                     "|Psi norm - (1 + log 2)| <= tol", "gauss-legendre", part="psi-norm"))
    chain = checks.hilbert_chain_constant(psi)
    rows.append(_row("d1-hilbert", chain < 15.0 / 4.0, chain, 15.0 / 4.0, 0.0,
                     "(1 + sqrt 2)(1 + Psi norm / pi) < 15/4", "arithmetic", part="chain"))
    rel = ctx.tol["hilbert"]
    n, box = _grid(ctx, 4096)
    tg = ctx.tgrid or TGrid.default(n, box)
    worst, fails = 0.0, 0
    for cf in corpus(1, n, box, 10, ctx.seed):
        rep = checks.hilbert_maximal_d1(cf.field, tg, rel_budget=rel)
        fails += not rep.passed
        worst = max(worst, rep.ratio)
    rows.append(_row("d1-hilbert", fails == 0, worst, 15.0 / 4.0, checks.default_budget(n, 1.0, rel),
                     "||H^* f||_2 <= (15/4 + tol) ||H f||_2 on every case (lower-route check)", "fourier",
                     part="maximal", n=n, box=box, fields=10, t_count=tg.count))
    return rows


def claim_riesz_norm(ctx: ClaimContext) -> list[VerifyReport]:
    tol = ctx.tol["riesz_norm"]
    rows = []
    # p = 2: isometry on mean-zero fields
    fields = [cf.field for cf in corpus(1, 1024, 20.0, 6, ctx.seed, kinds=("trig",))]
    rep = checks.verify_operator_norm_lower(fields, 1, 2.0, budget=tol)
    rows.append(_row("riesz-norm-lower", abs(rep.lhs - 1.0) <= 1e-10, rep.lhs, 1.0, 1e-10,
                     "ratio = H_2 = 1 on mean-zero fields", "fourier", d=1, p=2.0))
    # p = 4: peaked family, plus the generic corpus, all below H_4 + tol
    n = ctx.grid_n or 65536
    family = checks.peaked_family(n, 20.0, 4.0)
    rep = checks.verify_operator_norm_lower(family, 1, 4.0, budget=tol)
    generic = checks.verify_operator_norm_lower([cf.field for cf in corpus(1, 1024, 20.0, 10, ctx.seed)], 1, 4.0,
                                                budget=tol)
    ok = rep.lhs >= 1.8 and rep.passed and generic.passed
    rows.append(_row("riesz-norm-lower", ok, [rep.lhs, generic.lhs], [1.8, rep.constant], tol,
                     "peaked-family ratio >= 1.8 and every ratio <= H_4 + tol", "fourier", d=1, p=4.0, n=n))
    return rows


CLAIMS: dict[str, Callable[[ClaimContext], list[VerifyReport]]] = {
    "a_d": claim_a_d,
    "cor1.3": claim_cor13,
    "d1-hilbert": claim_hilbert,
    "factorization": claim_factorization,
    "g-constant": claim_g,
    "kernel-hankel": claim_hankel,
    "multiplier-decay": claim_decay,
    "mt-routes": claim_mt_routes,
    "riesz-norm-lower": claim_riesz_norm,
    "thm1.1-bounds": claim_bounds,
    "thm1.2-l1": claim_l1,
    "thm1.4-contract": claim_contract,
    "thm1.5-maximal": claim_maximal,
}


def run_claims(ids: Sequence[str] | None, ctx: ClaimContext) -> tuple[list[VerifyReport], dict[str, float]]:
    """Run the selected claims; returns rows sorted by claim id and per-claim timings."""
    ids = sorted(CLAIMS) if not ids else list(ids)
    unknown = [c for c in ids if c not in CLAIMS]
    if unknown:
        raise KeyError(f"unknown claim ids {unknown}; known: {sorted(CLAIMS)}")
    rows, timings = [], {}
    for cid in ids:
        start = time.perf_counter()
        rows.extend(CLAIMS[cid](ctx))
        timings[cid] = time.perf_counter() - start
    rows.sort(key=VerifyReport.sort_key)
    return rows, timings
