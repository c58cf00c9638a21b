"""Periodic grid, sampled fields, and the spectral operators shared by all solvers.

Everything lives on a uniform grid x_j = -L/2 + j*h, j = 0..n-1, with periodic
identification x_n == x_0.  Derivatives, the Helmholtz inverse (1 - d_xx)^-1,
translations, and dealiasing are all diagonal in Fourier space and therefore
exact for band-limited data.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

__all__ = [
    "Grid1D",
    "Field",
    "deriv",
    "helmholtz_inv",
    "integrate",
    "dealias",
    "spectral_shift",
    "peak_position",
    "field_to_csv",
    "field_from_csv",
]


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on [-L/2, L/2).

    Parameters
    ----------
    n : int
        Number of grid points.  Must be even (spectral symmetry) and >= 16.
    length : float
        Domain length L.
    """

    n: int
    length: float

    def __post_init__(self) -> None:
        if self.n < 16 or self.n % 2 != 0:
            raise ValueError(f"grid needs an even point count >= 16, got n={self.n}")
        if not (np.isfinite(self.length) and self.length > 0):
            raise ValueError(f"domain length must be positive and finite, got {self.length}")

    @property
    def h(self) -> float:
        return self.length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        return -0.5 * self.length + self.h * np.arange(self.n)

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers 2*pi*m/L in FFT ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    @cached_property
    def modes(self) -> np.ndarray:
        """Integer mode numbers m in FFT ordering."""
        return np.rint(np.fft.fftfreq(self.n) * self.n).astype(int)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask: keep |m| <= n/3 so quadratic products cannot alias."""
        return np.abs(self.modes) <= self.n // 3

    # --- array-level spectral operators (no validation; hot path) ---

    def deriv_values(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        vh = np.fft.fft(values)
        mult = (1j * self.k) ** order
        if order % 2 == 1:
            # Nyquist mode has no well-defined odd derivative on a real grid.
            mult[self.n // 2] = 0.0
        return np.fft.ifft(vh * mult).real

    def helmholtz_inv_values(self, values: np.ndarray) -> np.ndarray:
        vh = np.fft.fft(values)
        return np.fft.ifft(vh / (1.0 + self.k**2)).real

    def integrate_values(self, values: np.ndarray) -> float:
        # Trapezoid == rectangle rule on a periodic grid; spectrally accurate.
        return float(self.h * values.sum())

    def dealias_values(self, values: np.ndarray) -> np.ndarray:
        return np.fft.ifft(np.fft.fft(values) * self.dealias_mask).real

    def shift_values(self, values: np.ndarray, s: float) -> np.ndarray:
        """Samples of x -> f(x - s); exact for band-limited f, periodic wrap."""
        vh = np.fft.fft(values) * np.exp(-1j * self.k * s)
        return np.fft.ifft(vh).real


@dataclass(frozen=True, eq=False)
class Field:
    """Real scalar field sampled on a :class:`Grid1D`."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise ValueError(
                f"sample count {values.shape} does not match grid n={self.grid.n}"
            )
        if not np.all(np.isfinite(values)):
            bad = int(np.count_nonzero(~np.isfinite(values)))
            raise ValueError(f"field has {bad} non-finite samples")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid1D, fn) -> "Field":
        return cls(grid, fn(grid.x))

    @classmethod
    def zeros(cls, grid: Grid1D) -> "Field":
        return cls(grid, np.zeros(grid.n))


def _require_same_grid(*fields: Field) -> Grid1D:
    grid = fields[0].grid
    for f in fields[1:]:
        if f.grid != grid:
            raise ValueError("fields live on different grids")
    return grid


def deriv(f: Field, order: int = 1) -> Field:
    """Spectral derivative of the given order (order in {1, 2, 3})."""
    if order not in (1, 2, 3):
        raise ValueError(f"derivative order must be 1, 2 or 3, got {order}")
    return Field(f.grid, f.grid.deriv_values(f.values, order))


def helmholtz_inv(f: Field) -> Field:
    """Solve (1 - d_xx) w = f; in Fourier space w_k = f_k / (1 + k^2)."""
    return Field(f.grid, f.grid.helmholtz_inv_values(f.values))


def integrate(f: Field) -> float:
    """Integral over one period, h * sum(samples)."""
    return f.grid.integrate_values(f.values)


def dealias(f: Field) -> Field:
    """Zero the top third of the spectrum (2/3 rule)."""
    return Field(f.grid, f.grid.dealias_values(f.values))


def spectral_shift(f: Field, s: float) -> Field:
    """Translate: returns samples of x -> f(x - s)."""
    return Field(f.grid, f.grid.shift_values(f.values, s))


def peak_position(f: Field) -> float:
    """Locate the maximum of ``f`` to subgrid accuracy.

    Finds the largest sample and refines it with a quadratic fit through the
    sample and its two periodic neighbours.  The result is wrapped into
    [-L/2, L/2).  For a flat field the leftmost maximal sample is returned.
    """
    g = f.grid
    j = int(np.argmax(f.values))
    ym = f.values[(j - 1) % g.n]
    y0 = f.values[j]
    yp = f.values[(j + 1) % g.n]
    denom = ym - 2.0 * y0 + yp
    offset = 0.0 if denom == 0.0 else 0.5 * (ym - yp) / denom
    pos = g.x[j] + offset * g.h
    half = 0.5 * g.length
    return float((pos + half) % g.length - half)


def field_to_csv(f: Field, path: str | Path) -> None:
    """Write ``x,value`` rows with 17 significant digits."""
    with open(path, "w") as out:
        out.write("x,value\n")
        for x, v in zip(f.grid.x, f.values):
            out.write(f"{x:.17g},{v:.17g}\n")


def field_from_csv(path: str | Path) -> Field:
    """Read a field written by :func:`field_to_csv`, rebuilding its grid."""
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns x,value")
    x, values = data[:, 0], data[:, 1]
    n = len(x)
    h = x[1] - x[0]
    if not np.allclose(np.diff(x), h, rtol=1e-12, atol=1e-12):
        raise ValueError(f"{path}: grid points are not uniformly spaced")
    grid = Grid1D(n=n, length=n * h)
    if not np.allclose(grid.x, x, rtol=1e-12, atol=1e-12 * n * h):
        raise ValueError(f"{path}: grid points do not start at -L/2")
    return Field(grid, values)
