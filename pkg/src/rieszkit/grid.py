"""Uniform periodic grids, their Fourier transforms, norms and file format.

A :class:`GridField` holds samples ``f(x_i)`` at ``x_i = (i - n/2) h`` along
each axis, ``h = L / n``; frequency-domain fields hold samples at
``xi_k = k / L`` for ``k in [-n/2, n/2)`` and have ``box_side = n / L``.

File format
-----------
One JSON header line ``{"box_side", "dim", "domain", "dtype", "endianness",
"layout", "n_per_axis"}`` (keys sorted), a newline, then the raw
little-endian samples in row-major order (``f64`` or ``c128``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Literal

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "GridField",
    "TGrid",
    "GridFormatError",
    "fourier_forward",
    "fourier_inverse",
    "lp_norm",
    "write_field",
    "read_field",
]

Domain = Literal["space", "frequency"]


class GridFormatError(ValueError):
    """Raised for malformed grid files or inconsistent field shapes."""


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class GridField:
    """Samples of a function on a ``d``-dimensional periodic box.

    Attributes
    ----------
    values : ndarray
        Real or complex samples of shape ``(n,) * d``.
    box_side : float
        Physical side length ``L`` (in frequency domain the extent ``n / L``).
    domain : {"space", "frequency"}
        Which side of the transform the samples live on.
    """

    values: NDArray
    box_side: float
    domain: Domain = "space"

    def __post_init__(self) -> None:
        vals = np.asarray(self.values)
        if vals.ndim < 1 or vals.ndim > 3:
            raise GridFormatError("grids support 1 <= d <= 3")
        n = vals.shape[0]
        if any(s != n for s in vals.shape):
            raise GridFormatError(f"grid must be square, got shape {vals.shape}")
        if n < 16 or not _is_pow2(n):
            raise GridFormatError(f"n_per_axis must be a power of two >= 16, got {n}")
        if not self.box_side > 0:
            raise GridFormatError("box_side must be positive")
        if self.domain not in ("space", "frequency"):
            raise GridFormatError(f"unknown domain {self.domain!r}")
        if np.iscomplexobj(vals):
            vals = vals.astype(np.complex128, copy=False)
        else:
            vals = vals.astype(np.float64, copy=False)
        object.__setattr__(self, "values", vals)

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def spacing(self) -> float:
        return self.box_side / self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.d

    def axis(self) -> NDArray[np.float64]:
        """Coordinates ``(i - n/2) h`` along one axis."""
        return (np.arange(self.n) - self.n // 2) * self.spacing

    def mesh(self) -> list[NDArray[np.float64]]:
        return np.meshgrid(*([self.axis()] * self.d), indexing="ij")

    def radius(self) -> NDArray[np.float64]:
        return np.sqrt(sum(m * m for m in self.mesh()))

    def with_values(self, values: NDArray) -> "GridField":
        return GridField(values, self.box_side, self.domain)

    def real(self) -> "GridField":
        return self.with_values(self.values.real.copy())

    @classmethod
    def from_function(
        cls, fn: Callable[..., NDArray], d: int, n: int, box_side: float
    ) -> "GridField":
        """Sample ``fn(x_1, ..., x_d)`` (vectorized) on the centered grid."""
        axis = (np.arange(n) - n // 2) * (box_side / n)
        mesh = np.meshgrid(*([axis] * d), indexing="ij")
        return cls(np.asarray(fn(*mesh)), box_side)

    def __repr__(self) -> str:
        kind = "c128" if np.iscomplexobj(self.values) else "f64"
        return f"GridField(d={self.d}, n={self.n}, box_side={self.box_side}, {kind}, {self.domain})"


@dataclass(frozen=True)
class TGrid:
    """Geometric truncation radii ``t_k = t_min * ratio^k``, ``k < count``."""

    t_min: float
    ratio: float
    count: int

    def __post_init__(self) -> None:
        if not self.t_min > 0:
            raise ValueError("t_min must be positive")
        if self.count < 1:
            raise ValueError("count must be at least 1")
        if self.count > 1 and not self.ratio > 1:
            raise ValueError("ratio must exceed 1")

    @property
    def values(self) -> NDArray[np.float64]:
        return self.t_min * self.ratio ** np.arange(self.count, dtype=float)

    @property
    def t_max(self) -> float:
        return float(self.values[-1])

    @classmethod
    def default(cls, n: int, box_side: float) -> "TGrid":
        """``t_min = 4 L / n``, quarter-octave ratio, reaching ``L / 4``."""
        t_min = 4.0 * box_side / n
        ratio = 2.0**0.25
        count = int(math.floor(math.log((box_side / 4.0) / t_min) / math.log(ratio) + 1e-9)) + 1
        return cls(t_min, ratio, max(count, 1))

    @classmethod
    def spanning(cls, t_lo: float, t_hi: float, count: int) -> "TGrid":
        """``count`` geometric samples from ``t_lo`` to ``t_hi`` inclusive."""
        if count == 1:
            return cls(t_lo, 2.0, 1)
        return cls(t_lo, (t_hi / t_lo) ** (1.0 / (count - 1)), count)

    @classmethod
    def single(cls, t: float) -> "TGrid":
        return cls(t, 2.0, 1)


# ---------------------------------------------------------------------------
# Fourier transforms
# ---------------------------------------------------------------------------


def fourier_forward(f: GridField) -> GridField:
    """Approximate continuous transform ``int f(x) exp(-2 pi i x.xi) dx``.

    Returns samples at ``xi_k = k / L`` ordered like the spatial grid
    (``k = -n/2 .. n/2 - 1``).
    """
    if f.domain != "space":
        raise GridFormatError("fourier_forward expects a space-domain field")
    spec = np.fft.fftshift(np.fft.fftn(np.fft.ifftshift(f.values))) * f.cell_volume
    return GridField(spec, f.n / f.box_side, "frequency")


def fourier_inverse(g: GridField) -> GridField:
    """Inverse of :func:`fourier_forward`."""
    if g.domain != "frequency":
        raise GridFormatError("fourier_inverse expects a frequency-domain field")
    box = g.n / g.box_side
    h = box / g.n
    vals = np.fft.fftshift(np.fft.ifftn(np.fft.ifftshift(g.values))) / h**g.d
    return GridField(vals, box, "space")


def frequency_axis(n: int, box_side: float) -> NDArray[np.float64]:
    """FFT-ordered frequencies ``k / L`` along one axis."""
    return np.fft.fftfreq(n, d=box_side / n)


def frequency_index_sq(n: int, d: int) -> NDArray[np.int64]:
    """``sum_i k_i^2`` on the FFT-ordered integer frequency lattice."""
    k = np.fft.fftfreq(n, d=1.0 / n).round().astype(np.int64)
    total = np.zeros((n,) * d, dtype=np.int64)
    for axis in range(d):
        shape = [1] * d
        shape[axis] = n
        total = total + (k**2).reshape(shape)
    return total


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


def lp_norm(f: GridField, p: float) -> float:
    """``(h^d sum |f|^p)^(1/p)``; ``p = inf`` gives the max norm.

    Sums use ``math.fsum`` so the result does not depend on summation order.
    """
    mag = np.abs(f.values).ravel()
    if math.isinf(p):
        return float(mag.max()) if mag.size else 0.0
    if p < 1:
        raise ValueError("p must be >= 1")
    peak = float(mag.max())
    if peak == 0.0:
        return 0.0
    # scale by the peak to avoid overflow for large p
    total = math.fsum(((mag / peak) ** p).tolist())
    return peak * (f.cell_volume * total) ** (1.0 / p)


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------


def write_field(path: str | Path, f: GridField) -> None:
    """Write ``f`` in the header-plus-raw-samples format."""
    dtype = "c128" if np.iscomplexobj(f.values) else "f64"
    header = {
        "dim": f.d,
        "n_per_axis": f.n,
        "box_side": f.box_side,
        "dtype": dtype,
        "layout": "row-major",
        "endianness": "little",
        "domain": f.domain,
    }
    raw = np.ascontiguousarray(f.values, dtype="<c16" if dtype == "c128" else "<f8")
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("ascii"))
        fh.write(b"\n")
        fh.write(raw.tobytes(order="C"))


def read_field(path: str | Path) -> GridField:
    """Read and validate a field file written by :func:`write_field`."""
    with open(path, "rb") as fh:
        line = fh.readline()
        body = fh.read()
    try:
        header = json.loads(line.decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise GridFormatError(f"bad header in {path}: {exc}") from exc
    required = {"dim", "n_per_axis", "box_side", "dtype", "layout", "endianness"}
    missing = required - set(header)
    if missing:
        raise GridFormatError(f"header lacks {sorted(missing)}")
    if header["layout"] != "row-major" or header["endianness"] != "little":
        raise GridFormatError("only row-major little-endian files are supported")
    dtypes = {"f64": "<f8", "c128": "<c16"}
    if header["dtype"] not in dtypes:
        raise GridFormatError(f"unknown dtype {header['dtype']!r}")
    d = int(header["dim"])
    n = int(header["n_per_axis"])
    dt = np.dtype(dtypes[header["dtype"]])
    expected = n**d * dt.itemsize
    if len(body) != expected:
        raise GridFormatError(f"expected {expected} bytes of samples, found {len(body)}")
    vals = np.frombuffer(body, dtype=dt).reshape((n,) * d).copy()
    return GridField(vals, float(header["box_side"]), header.get("domain", "space"))
