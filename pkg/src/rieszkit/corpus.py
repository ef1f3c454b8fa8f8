"""Seeded test fields for the verification harness.

Three smoothness classes are provided. Tensor Gaussians have known
transforms, radial bumps ``exp(-1 / (1 - |x/a|^2))`` are compactly
supported and infinitely smooth, and random trigonometric polynomials
oscillate on the scale of the box. Every field is a deterministic function
of ``(kind, d, n, box_side, seed)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from .grid import GridField

__all__ = ["CorpusField", "gaussian", "radial_bump", "trig_polynomial", "corpus", "KINDS"]

Kind = Literal["gaussian", "bump", "trig"]
KINDS: tuple[Kind, ...] = ("gaussian", "bump", "trig")


@dataclass(frozen=True)
class CorpusField:
    """A labelled test field."""

    label: str
    field: GridField


def _mesh(d: int, n: int, box_side: float) -> list[NDArray[np.float64]]:
    axis = (np.arange(n) - n // 2) * (box_side / n)
    return np.meshgrid(*([axis] * d), indexing="ij")


def gaussian(d: int, n: int, box_side: float, center: NDArray, widths: NDArray) -> GridField:
    """``prod_i exp(-pi ((x_i - c_i) / w_i)^2)``."""
    mesh = _mesh(d, n, box_side)
    arg = sum(((m - c) / w) ** 2 for m, c, w in zip(mesh, center, widths))
    return GridField(np.exp(-math.pi * arg), box_side)


def radial_bump(d: int, n: int, box_side: float, center: NDArray, radius: float) -> GridField:
    """``exp(-1 / (1 - |(x - c) / a|^2))`` inside the ball, zero outside."""
    mesh = _mesh(d, n, box_side)
    s = sum((m - c) ** 2 for m, c in zip(mesh, center)) / radius**2
    out = np.zeros_like(s)
    inside = s < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside]))
    return GridField(out, box_side)


def trig_polynomial(
    d: int, n: int, box_side: float, rng: np.random.Generator, max_mode: int = 6
) -> GridField:
    """Real trigonometric polynomial with random coefficients on modes ``|k_i| <= max_mode``.

    Coefficients decay like ``(1 + |k|^2)^-1`` and the mean is zero.
    """
    mesh = _mesh(d, n, box_side)
    ks = np.array(np.meshgrid(*([np.arange(-max_mode, max_mode + 1)] * d), indexing="ij"))
    ks = ks.reshape(d, -1).T
    out = np.zeros(mesh[0].shape)
    for k in ks:
        if not np.any(k):
            continue
        amp = rng.normal(size=2) / (1.0 + float(k @ k))
        phase = sum(2.0 * math.pi * ki * m / box_side for ki, m in zip(k, mesh))
        out += amp[0] * np.cos(phase) + amp[1] * np.sin(phase)
    return GridField(out, box_side)


def _draw(kind: Kind, d: int, n: int, box_side: float, rng: np.random.Generator) -> GridField:
    # bumps and Gaussians stay well inside the box so periodization is negligible
    if kind == "gaussian":
        center = rng.uniform(-0.1, 0.1, size=d) * box_side
        widths = rng.uniform(0.08, 0.2, size=d) * box_side
        return gaussian(d, n, box_side, center, widths)
    if kind == "bump":
        center = rng.uniform(-0.1, 0.1, size=d) * box_side
        radius = float(rng.uniform(0.1, 0.25)) * box_side
        return radial_bump(d, n, box_side, center, radius)
    if kind == "trig":
        return trig_polynomial(d, n, box_side, rng)
    raise ValueError(f"unknown corpus kind {kind!r}")


def corpus(
    d: int,
    n: int,
    box_side: float,
    count: int,
    seed: int = 0,
    kinds: tuple[Kind, ...] = KINDS,
) -> list[CorpusField]:
    """``count`` fields cycling through ``kinds``, each from its own child seed."""
    out = []
    for i in range(count):
        kind = kinds[i % len(kinds)]
        rng = np.random.default_rng([seed, i, d])
        out.append(CorpusField(f"{kind}-{seed}-{i}", _draw(kind, d, n, box_side, rng)))
    return out
